#pragma once

// Exact evaluators for the last-iterate identities and bounds.

#include <cstddef>
#include <span>
#include <string>

#include "lrsched/schedule_core.hpp"

namespace lrsched {

struct SidePair {
  double lhs = 0.0;
  double rhs = 0.0;

  double gap() const { return rhs - lhs; }
};

// All-tail summation identity. lhs = q_T and
// rhs = (1/w_{1:T}) sum_t w_t q_t
//     + sum_{k<T} (1/w_{k+1:T} - 1/w_{k:T}) sum_{t>=k} w_t (q_t - q_k).
// Equal for any real q and positive w. Evaluated in O(T).
SidePair tail_identity(std::span<const double> q, std::span<const double> w);

// Older inequality for nonincreasing positive eta and q >= 0:
// eta_T q_T <= (1/T) sum_t eta_t q_t
//              + sum_{k<T} 1/(k(k+1)) sum_{t>T-k} eta_t (q_t - q_{T-k}).
// The inner sum runs over the last k steps, as the telescoping proof requires.
SidePair tail_upper_bound(std::span<const double> q, std::span<const double> eta);

// (D^2 + sum_t w_t^2 ||g_t||^2) / (2 w_{1:T}).
double sgd_weighted_bound(const WeightSequence& w, std::span<const double> gradient_norms, double distance);

struct BoundReport {
  double distance_term = 0.0;
  double variance_term = 0.0;
  double tail_term = 0.0;
  double total = 0.0;
  std::string inputs_digest;
};

// Last-iterate bound for SGD with an arbitrary schedule:
//   D^2 / (2 S_1) + sum_t eta_t^2 g_t^2 / (2 S_1)
//   + 1/2 sum_{k<T} eta_k / S_{k+1} * (sum_{t>=k} eta_t^2 g_t^2) / S_k
// with S_k = sum_{t>=k} eta_t. Throws DomainError on a zero suffix sum.
BoundReport anyeta_bound(const Schedule& eta, std::span<const double> gradient_norms, double distance);

// Same with every gradient norm equal to a Lipschitz constant G.
BoundReport anyeta_bound(const Schedule& eta, double lipschitz, double distance);

// 1 + 1/2 + ... + 1/n; H(0) = 0.
double harmonic(std::size_t n);

// 2 + (H(T-1) - 2/3) / (T + 1): the loosened closed-form constant bounding the schedule
// eta_t = D/(G sqrt T) (1 - t/(T+1)) in units of DG/sqrt(T).
double linear_decay_constant(std::size_t horizon);

// The exact value of anyeta_bound for that same schedule and constant
// gradient norms, in units of DG/sqrt(T): 2 + (H(T-1) - 3/2) / (T + 1).
double linear_decay_exact_constant(std::size_t horizon);

// eta_t = D/(G sqrt T) (1 - t/(T+1)), t = 1..T.
Schedule offset_linear_schedule(std::size_t horizon, double lipschitz, double distance);

}  // namespace lrsched
