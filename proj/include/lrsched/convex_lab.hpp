#pragma once

// Desk-scale stochastic convex problems, optimizers driven by a schedule, and
// the regret-to-last-iterate reduction.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lrsched/bounds.hpp"
#include "lrsched/refinement.hpp"
#include "lrsched/schedule_core.hpp"

namespace lrsched {

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

struct SparseRow {
  std::vector<std::uint32_t> index;  // zero-based, strictly increasing
  std::vector<double> value;
};

struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<int> labels;
  std::size_t dimension = 0;
};

// LIBSVM text: `label idx:val idx:val ...`, 1-based strictly increasing
// indices, blank lines skipped. Throws ParseError with the line number.
Dataset parse_libsvm(std::string_view text);
Dataset load_libsvm(const std::filesystem::path& path);

// Gaussian features, a planted linear separator with bias, and 10% of labels
// flipped so the data is not separable.
Dataset make_synthetic_dataset(std::size_t samples, std::size_t dimension, std::uint64_t seed);

// f(x) = G ||x - x*||_2, subgradient 0 at x*.
struct AbsLipschitz {
  double lipschitz = 1.0;
  Vector optimum;
};

// Multinomial logistic regression with a bias per class. Parameters are laid
// out class-major: x[c * (d + 1) + j], j == d is the bias.
class LogisticRegression {
 public:
  LogisticRegression(Dataset data, std::size_t batch_size);

  std::size_t dimension() const { return classes_ * (data_.dimension + 1); }
  std::size_t classes() const { return classes_; }
  std::size_t batch_size() const { return batch_size_; }
  const Dataset& data() const { return data_; }

  double loss(const Vector& x) const;
  double error_rate(const Vector& x) const;
  void minibatch_gradient(const Vector& x, Rng& rng, Vector& out) const;
  void full_gradient(const Vector& x, Vector& out) const;

 private:
  void logits(const Vector& x, std::size_t row, std::vector<double>& out) const;
  void accumulate_gradient(const Vector& x, std::size_t row, double weight, std::vector<double>& scratch,
                           Vector& out) const;

  Dataset data_;
  std::vector<std::size_t> class_of_;  // row -> class index
  std::size_t classes_ = 0;
  std::size_t batch_size_ = 16;
};

class Problem {
 public:
  static Problem abs_lipschitz(double lipschitz, Vector optimum, Vector start);
  static Problem synthetic_logreg(std::size_t samples, std::size_t dimension, std::uint64_t seed,
                                  std::size_t batch_size = 16);
  static Problem libsvm_logreg(Dataset data, std::string name, std::size_t batch_size = 16);

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return start_.size(); }
  const Vector& initial_point() const { return start_; }

  double loss(const Vector& x) const;
  std::optional<double> error_rate(const Vector& x) const;
  // Known minimum value f* (abs problems only).
  std::optional<double> optimal_value() const;
  // Known minimizer u (abs problems only).
  std::optional<Vector> comparator() const;
  // Upper bound on ||g|| (abs problems only).
  std::optional<double> lipschitz() const;
  // Stochastic subgradient at x; deterministic for abs problems.
  void gradient(const Vector& x, Rng& rng, Vector& out) const;

 private:
  Problem(std::variant<AbsLipschitz, LogisticRegression> model, Vector start, std::string name);

  std::variant<AbsLipschitz, LogisticRegression> model_;
  Vector start_;
  std::string name_;
};

struct RunOptions {
  bool record_iterates = false;
};

struct RunReport {
  std::string problem;
  std::string optimizer;
  std::string schedule_digest;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double scale = 0.0;
  double final_loss = 0.0;
  std::optional<double> final_error_rate;
  std::optional<double> final_suboptimality;  // f(x_{T+1}) - f*, when f* is known
  std::optional<double> regret_vs_u;          // sum_t <g_t, x_t - u>, when u is known
  GradientNormLog norm_log;  // l2 for SGD, adam_weighted for the Adam-like runner
  GradientNormLog l1_log;
  Vector final_point;
  std::vector<Vector> iterates;  // x_1..x_{T+1}, only with RunOptions::record_iterates
};

// x_{t+1} = x_t - scale * eta_t * g_t for t = 1..T; reports on x_{T+1}.
RunReport run_sgd(const Problem& problem, const Schedule& schedule, double scale, std::size_t steps,
                  std::uint64_t seed, const RunOptions& options = {});

// RMSProp-style preconditioning (Adam without momentum):
// v_t = b2 v_{t-1} + (1 - b2) g_t^2, vhat = v_t / (1 - b2^t),
// x <- x - scale * eta_t * g_t / sqrt(vhat + eps). Logs
// G_t = sum_i g_i^2 / sqrt(vhat_i + eps) and ||g_t||_1.
inline constexpr double kAdamEpsilon = 1e-8;
RunReport run_adam_like(const Problem& problem, const Schedule& schedule, double scale, std::size_t steps,
                        std::uint64_t seed, double beta2, const RunOptions& options = {});

struct Trajectory {
  std::vector<Vector> base_points;       // z_1..z_{T+1}
  std::vector<Vector> scheduled_points;  // x_1..x_T
  std::vector<Vector> updates;           // Delta_t = z_{t+1} - z_t
  std::vector<Vector> gradients;         // g_t, evaluated at x_t
  std::vector<double> suboptimality;     // q_t = f(x_t) - f*, (raw loss when f* is unknown)
};

// x_1 = z_1 and x_{t+1} = x_t + (w_{t+1:T} / w_{1:T}) Delta_t. `updates` has
// T - 1 entries; returns x_1..x_T.
std::vector<Vector> scheduled_reduction(std::span<const Vector> updates, const WeightSequence& w,
                                        const Vector& start);

// Weighted online gradient descent z_{t+1} = z_t - w_t g_t with gradients
// taken at the scheduled points x_t. T = w.size().
Trajectory run_weighted_ogd(const Problem& problem, const WeightSequence& w, std::uint64_t seed);

// lhs = sum_t <w_t g_t, z_t - u>,
// rhs = ||z_1 - u||^2 / 2 - ||z_{T+1} - u||^2 / 2 + sum_t w_t^2 ||g_t||^2 / 2.
SidePair regret(const Trajectory& trajectory, const WeightSequence& w, const Vector& comparator);

// Stable textual fingerprint of a schedule (length, max, FNV-1a of the bits).
std::string schedule_digest(const Schedule& schedule);

}  // namespace lrsched
