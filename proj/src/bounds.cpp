#include "lrsched/bounds.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "lrsched/errors.hpp"
#include "lrsched/kahan.hpp"

namespace lrsched {

namespace {

void require_finite(std::span<const double> values, const char* name) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(name) + " contains a non-finite value");
  }
}

}  // namespace

SidePair tail_identity(std::span<const double> q, std::span<const double> w) {
  if (q.size() != w.size()) throw DomainError("tail identity: q and w differ in length");
  if (q.empty()) throw DomainError("tail identity needs T >= 1");
  require_finite(q, "q");
  for (double wt : w) {
    if (!(wt > 0.0) || !std::isfinite(wt)) throw DomainError("tail identity: weights must be positive");
  }
  const std::size_t n = q.size();

  // suffix_w[k] = w_{k:T}, tail_mean[k] = (sum_{t>=k} w_t q_t) / w_{k:T}.
  std::vector<double> suffix_w(n + 1, 0.0);
  std::vector<double> tail_mean(n + 1, 0.0);
  KahanSum acc_w;
  KahanSum acc_wq;
  for (std::size_t k = n; k-- > 0;) {
    acc_w += w[k];
    acc_wq += w[k] * q[k];
    suffix_w[k] = acc_w.value();
    tail_mean[k] = acc_wq.value() / suffix_w[k];
  }

  // (1/s_{k+1} - 1/s_k) * sum_{t>=k} w_t (q_t - q_k) = (w_k / s_k) * (mean_{t>k} q - q_k)
  KahanSum rhs;
  rhs += tail_mean[0];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    rhs += (w[k] / suffix_w[k]) * (tail_mean[k + 1] - q[k]);
  }
  return {q[n - 1], rhs.value()};
}

SidePair tail_upper_bound(std::span<const double> q, std::span<const double> eta) {
  if (q.size() != eta.size()) throw DomainError("tail bound: q and eta differ in length");
  if (q.empty()) throw DomainError("tail bound needs T >= 1");
  const std::size_t n = q.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (!(q[t] >= 0.0) || !std::isfinite(q[t])) throw DomainError("tail bound: q must be nonnegative");
    if (!(eta[t] > 0.0) || !std::isfinite(eta[t])) throw DomainError("tail bound: eta must be positive");
    if (t > 0 && eta[t] > eta[t - 1]) {
      throw DomainError("tail bound: eta increases at step " + std::to_string(t + 1));
    }
  }

  // suffix sums over t >= k of eta_t q_t and eta_t
  std::vector<double> suffix_eq(n + 1, 0.0);
  std::vector<double> suffix_e(n + 1, 0.0);
  KahanSum acc_eq;
  KahanSum acc_e;
  for (std::size_t k = n; k-- > 0;) {
    acc_eq += eta[k] * q[k];
    acc_e += eta[k];
    suffix_eq[k] = acc_eq.value();
    suffix_e[k] = acc_e.value();
  }

  // The k-th correction compares the last k steps against q_{T-k}; with
  // zero-based j = T-1-k that is (suffix_eq[j+1] - q_j suffix_e[j+1]) / (k(k+1)).
  KahanSum rhs;
  rhs += suffix_eq[0] / static_cast<double>(n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const auto k = static_cast<double>(n - 1 - j);
    rhs += (suffix_eq[j + 1] - q[j] * suffix_e[j + 1]) / (k * (k + 1.0));
  }
  return {eta[n - 1] * q[n - 1], rhs.value()};
}

double sgd_weighted_bound(const WeightSequence& w, std::span<const double> gradient_norms, double distance) {
  if (w.size() != gradient_norms.size()) throw DomainError("weights and gradient norms differ in length");
  if (!(distance > 0.0) || !std::isfinite(distance)) throw DomainError("distance D must be positive");
  require_finite(gradient_norms, "gradient norms");
  KahanSum energy;
  energy += distance * distance;
  for (std::size_t t = 0; t < w.size(); ++t) {
    const double step = w[t] * gradient_norms[t];
    energy += step * step;
  }
  return energy.value() / (2.0 * w.total());
}

BoundReport anyeta_bound(const Schedule& eta, std::span<const double> gradient_norms, double distance) {
  if (eta.size() != gradient_norms.size()) throw DomainError("schedule and gradient norms differ in length");
  if (!(distance > 0.0) || !std::isfinite(distance)) throw DomainError("distance D must be positive");
  for (double g : gradient_norms) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("gradient norms must be nonnegative and finite");
  }
  const std::size_t n = eta.size();

  // S[k] = sum_{t>=k} eta_t, Q[k] = sum_{t>=k} eta_t^2 g_t^2
  std::vector<double> S(n + 1, 0.0);
  std::vector<double> Q(n + 1, 0.0);
  KahanSum acc_s;
  KahanSum acc_q;
  for (std::size_t k = n; k-- > 0;) {
    const double step = eta[k] * gradient_norms[k];
    acc_s += eta[k];
    acc_q += step * step;
    S[k] = acc_s.value();
    Q[k] = acc_q.value();
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (S[k] == 0.0) throw DomainError("zero suffix sum at step " + std::to_string(k + 1) +
                                          "; eta is zero from here on, so the bound is infinite");
  }
  if (S[0] == 0.0) throw DomainError("zero suffix sum: schedule is identically zero");

  BoundReport report;
  report.distance_term = distance * distance / (2.0 * S[0]);
  report.variance_term = Q[0] / (2.0 * S[0]);
  KahanSum tail;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    tail += (eta[k] / S[k + 1]) * (Q[k] / S[k]);
  }
  report.tail_term = 0.5 * tail.value();
  report.total = report.distance_term + report.variance_term + report.tail_term;

  std::ostringstream digest;
  digest.precision(17);
  digest << "T=" << n << " sum_eta=" << S[0] << " D=" << distance;
  report.inputs_digest = digest.str();
  return report;
}

BoundReport anyeta_bound(const Schedule& eta, double lipschitz, double distance) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) throw DomainError("Lipschitz constant G must be nonnegative");
  const std::vector<double> norms(eta.size(), lipschitz);
  BoundReport report = anyeta_bound(eta, norms, distance);
  std::ostringstream digest;
  digest.precision(17);
  digest << report.inputs_digest << " G=" << lipschitz;
  report.inputs_digest = digest.str();
  return report;
}

double harmonic(std::size_t n) {
  KahanSum acc;
  for (std::size_t t = n; t >= 1; --t) acc += 1.0 / static_cast<double>(t);
  return acc.value();
}

double linear_decay_constant(std::size_t horizon) {
  if (horizon < 2) throw DomainError("linear decay constant needs T >= 2");
  return 2.0 + (harmonic(horizon - 1) - 2.0 / 3.0) / static_cast<double>(horizon + 1);
}

double linear_decay_exact_constant(std::size_t horizon) {
  if (horizon < 2) throw DomainError("linear decay constant needs T >= 2");
  return 2.0 + (harmonic(horizon - 1) - 1.5) / static_cast<double>(horizon + 1);
}

Schedule offset_linear_schedule(std::size_t horizon, double lipschitz, double distance) {
  if (horizon == 0) throw DomainError("schedule horizon must be at least 1");
  if (!(lipschitz > 0.0) || !(distance > 0.0)) throw DomainError("G and D must be positive");
  const double base = distance / (lipschitz * std::sqrt(static_cast<double>(horizon)));
  std::vector<double> values(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    values[t - 1] = base * static_cast<double>(horizon + 1 - t) / static_cast<double>(horizon + 1);
  }
  return Schedule(std::move(values));
}

}  // namespace lrsched
