#pragma once

// Refined schedules from observed gradient norms, and the closed-form optimal
// weights they approximate.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lrsched/schedule_core.hpp"

namespace lrsched {

enum class NormKind { l2, l1, adam_weighted };

std::string_view to_string(NormKind kind);
std::optional<NormKind> parse_norm_kind(std::string_view name);

class GradientNormLog {
 public:
  GradientNormLog() = default;
  GradientNormLog(std::vector<std::int64_t> steps, std::vector<double> norms, NormKind kind);

  // Steps 1..n.
  static GradientNormLog sequential(std::vector<double> norms, NormKind kind);

  std::size_t size() const { return norms_.size(); }
  bool empty() const { return norms_.empty(); }
  std::span<const std::int64_t> steps() const { return steps_; }
  std::span<const double> norms() const { return norms_; }
  NormKind kind() const { return kind_; }

  GradientNormLog with_kind(NormKind kind) const { return GradientNormLog(steps_, norms_, kind); }

 private:
  std::vector<std::int64_t> steps_;
  std::vector<double> norms_;
  NormKind kind_ = NormKind::l2;
};

enum class Weighting { inv_sq_l2, inv_l1, inv_adam_weighted };
enum class ZeroPolicy { error, clamp };

std::string_view to_string(Weighting weighting);
std::optional<Weighting> parse_weighting(std::string_view name);
// inv_sq_l2 for l2 logs, inv_l1 for l1 logs, inv_adam_weighted for Adam logs.
Weighting default_weighting(NormKind kind);

struct RefinementConfig {
  double tau = 0.1;
  Weighting weighting = Weighting::inv_sq_l2;
  ZeroPolicy zero_policy = ZeroPolicy::error;
  double epsilon_fraction = 1e-3;  // clamp floor, relative to max filtered norm

  void validate() const;
};

struct RefinementResult {
  Schedule schedule;             // normalized: max 1, last entry 0
  std::vector<double> filtered;  // median-filtered norms
  std::vector<double> weights;   // unnormalized inverse-norm weights
  std::size_t filter_width = 1;
  bool clamped = false;          // true if any filtered norm was raised to the floor
};

// Centered sliding median over a sequence padded with its first element on the
// left and mirrored (edge not repeated) on the right. `width` must be odd.
std::vector<double> median_filter(std::span<const double> values, std::size_t width);

// max(1, round(tau * T)), bumped to the next odd number.
std::size_t refinement_filter_width(double tau, std::size_t horizon);

RefinementResult refine(const GradientNormLog& log, const RefinementConfig& config);

struct OptimalWeightsResult {
  WeightSequence weights;
  double lambda = 0.0;
  double bound_value = 0.0;
};

// w_t = lambda / ||g_t||^2 with lambda = D / sqrt(sum_p ||g_p||^-2).
OptimalWeightsResult optimal_weights(std::span<const double> gradient_norms, double distance);

// Per-coordinate variant: energy_t = sum_i lr[t][i] * g[t][i]^2 and
// w_t = R / sqrt(sum_p 1 / energy_p) / energy_t.
WeightSequence per_coordinate_weights(std::span<const std::vector<double>> learning_rates,
                                      std::span<const std::vector<double>> gradients, double radius);

}  // namespace lrsched
