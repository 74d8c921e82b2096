#include "lrsched/refinement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "lrsched/bounds.hpp"
#include "lrsched/errors.hpp"
#include "lrsched/kahan.hpp"

namespace lrsched {

namespace {

constexpr std::array<std::string_view, 3> kNormKindNames{"l2", "l1", "adam_weighted"};
constexpr std::array<std::string_view, 3> kWeightingNames{"inv_sq_l2", "inv_l1", "inv_adam_weighted"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

// Index into the input for padded position `j` (may be negative or >= n).
std::size_t padded_index(std::ptrdiff_t j, std::size_t n) {
  if (j < 0) return 0;  // nearest
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  const std::ptrdiff_t m = j % period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);  // reflect
}

// Sliding-window median over an odd-sized window, O(log width) per update.
class SlidingMedian {
 public:
  void insert(double x) {
    if (low_.empty() || x <= *low_.rbegin()) {
      low_.insert(x);
    } else {
      high_.insert(x);
    }
    rebalance();
  }

  void erase(double x) {
    if (x <= *low_.rbegin()) {
      low_.erase(low_.find(x));
    } else {
      high_.erase(high_.find(x));
    }
    rebalance();
  }

  double median() const { return *low_.rbegin(); }

 private:
  void rebalance() {
    while (low_.size() > high_.size() + 1) {
      auto it = std::prev(low_.end());
      high_.insert(*it);
      low_.erase(it);
    }
    while (high_.size() > low_.size()) {
      auto it = high_.begin();
      low_.insert(*it);
      high_.erase(it);
    }
  }

  std::multiset<double> low_;
  std::multiset<double> high_;
};

OptimalWeightsResult weights_from_energies(std::span<const double> energies, std::span<const double> gradient_norms,
                                           double scale) {
  std::vector<double> inverse(energies.size());
  KahanSum total;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    inverse[i] = 1.0 / energies[i];
    total += inverse[i];
  }
  const double lambda = scale / std::sqrt(total.value());
  for (double& v : inverse) v *= lambda;
  WeightSequence weights(std::move(inverse));
  const double bound = gradient_norms.empty() ? lambda : sgd_weighted_bound(weights, gradient_norms, scale);
  return {std::move(weights), lambda, bound};
}

}  // namespace

std::string_view to_string(NormKind kind) { return kNormKindNames[static_cast<std::size_t>(kind)]; }
std::optional<NormKind> parse_norm_kind(std::string_view name) { return lookup<NormKind>(kNormKindNames, name); }

std::string_view to_string(Weighting weighting) { return kWeightingNames[static_cast<std::size_t>(weighting)]; }
std::optional<Weighting> parse_weighting(std::string_view name) { return lookup<Weighting>(kWeightingNames, name); }

Weighting default_weighting(NormKind kind) {
  switch (kind) {
    case NormKind::l1:
      return Weighting::inv_l1;
    case NormKind::adam_weighted:
      return Weighting::inv_adam_weighted;
    case NormKind::l2:
      break;
  }
  return Weighting::inv_sq_l2;
}

GradientNormLog::GradientNormLog(std::vector<std::int64_t> steps, std::vector<double> norms, NormKind kind)
    : steps_(std::move(steps)), norms_(std::move(norms)), kind_(kind) {
  if (steps_.size() != norms_.size()) throw DomainError("norm log: steps and norms differ in length");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i] < 1) throw DomainError("norm log: steps must be positive");
    if (i > 0 && steps_[i] <= steps_[i - 1]) throw DomainError("norm log: steps must be strictly increasing");
    if (!(norms_[i] >= 0.0) || !std::isfinite(norms_[i])) {
      throw DomainError("norm log: norm at step " + std::to_string(steps_[i]) + " is negative or not finite");
    }
  }
}

GradientNormLog GradientNormLog::sequential(std::vector<double> norms, NormKind kind) {
  std::vector<std::int64_t> steps(norms.size());
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<std::int64_t>(i + 1);
  return GradientNormLog(std::move(steps), std::move(norms), kind);
}

void RefinementConfig::validate() const {
  if (!(tau > 0.0) || !(tau <= 1.0)) throw DomainError("tau must lie in (0, 1]");
  if (zero_policy == ZeroPolicy::clamp && !(epsilon_fraction > 0.0)) {
    throw DomainError("clamp epsilon fraction must be positive");
  }
}

std::vector<double> median_filter(std::span<const double> values, std::size_t width) {
  if (values.empty()) throw DomainError("median filter of an empty sequence");
  if (width % 2 == 0) throw DomainError("median filter width must be odd");
  const std::size_t n = values.size();
  if (width > 2 * n + 1) throw DomainError("median filter width exceeds 2 * length + 1");

  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  std::vector<double> out(n);
  SlidingMedian window;
  for (std::ptrdiff_t j = -half; j <= half; ++j) window.insert(values[padded_index(j, n)]);
  out[0] = window.median();
  for (std::size_t t = 1; t < n; ++t) {
    const auto centre = static_cast<std::ptrdiff_t>(t);
    window.erase(values[padded_index(centre - half - 1, n)]);
    window.insert(values[padded_index(centre + half, n)]);
    out[t] = window.median();
  }
  return out;
}

std::size_t refinement_filter_width(double tau, std::size_t horizon) {
  auto width = static_cast<std::size_t>(std::llround(tau * static_cast<double>(horizon)));
  width = std::max<std::size_t>(1, width);
  if (width % 2 == 0) ++width;
  return width;
}

RefinementResult refine(const GradientNormLog& log, const RefinementConfig& config) {
  config.validate();
  if (log.empty()) throw DomainError("cannot refine an empty gradient norm log");

  RefinementResult result{Schedule({0.0}), {}, {}, refinement_filter_width(config.tau, log.size()), false};
  result.filtered = median_filter(log.norms(), result.filter_width);

  const double peak = *std::max_element(result.filtered.begin(), result.filtered.end());
  const bool has_zero = std::any_of(result.filtered.begin(), result.filtered.end(), [](double g) { return g == 0.0; });
  if (has_zero) {
    if (config.zero_policy == ZeroPolicy::error || peak == 0.0) {
      throw DegenerateError(
          "filtered gradient norms reach zero; the refined schedule would blow up the step size where the "
          "gradient norm sequence is driven to zero. Use a linear decay schedule instead "
          "(or pass an explicit clamp policy)");
    }
  }
  if (config.zero_policy == ZeroPolicy::clamp) {
    const double floor = config.epsilon_fraction * peak;
    for (double& g : result.filtered) {
      if (g < floor) {
        g = floor;
        result.clamped = true;
      }
    }
  }

  result.weights.resize(log.size());
  double weight_peak = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double g = result.filtered[i];
    result.weights[i] = config.weighting == Weighting::inv_sq_l2 ? 1.0 / (g * g) : 1.0 / g;
    weight_peak = std::max(weight_peak, result.weights[i]);
  }
  // The normalized schedule is invariant to a common factor; keep weights <= 1.
  std::vector<double> scaled(result.weights);
  if (std::isfinite(weight_peak)) {
    for (double& w : scaled) w /= weight_peak;
  }
  result.schedule = weights_to_schedule(WeightSequence(std::move(scaled)), true);
  return result;
}

OptimalWeightsResult optimal_weights(std::span<const double> gradient_norms, double distance) {
  if (gradient_norms.empty()) throw DomainError("optimal weights need at least one gradient norm");
  if (!(distance > 0.0) || !std::isfinite(distance)) throw DomainError("distance D must be positive");
  std::vector<double> energies(gradient_norms.size());
  for (std::size_t i = 0; i < gradient_norms.size(); ++i) {
    const double g = gradient_norms[i];
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw DomainError("gradient norm at step " + std::to_string(i + 1) + " is not positive; weight would be infinite");
    }
    energies[i] = g * g;
  }
  return weights_from_energies(energies, gradient_norms, distance);
}

WeightSequence per_coordinate_weights(std::span<const std::vector<double>> learning_rates,
                                      std::span<const std::vector<double>> gradients, double radius) {
  if (gradients.empty()) throw DomainError("per-coordinate weights need at least one step");
  if (learning_rates.size() != gradients.size()) throw DomainError("learning-rate and gradient tables differ in length");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("R must be positive");

  std::vector<double> energies(gradients.size());
  for (std::size_t t = 0; t < gradients.size(); ++t) {
    if (learning_rates[t].size() != gradients[t].size()) {
      throw DomainError("row " + std::to_string(t + 1) + ": learning-rate and gradient dimensions differ");
    }
    KahanSum energy;
    for (std::size_t i = 0; i < gradients[t].size(); ++i) {
      const double lr = learning_rates[t][i];
      if (!(lr > 0.0) || !std::isfinite(lr)) throw DomainError("per-coordinate learning rates must be positive");
      const double g = gradients[t][i];
      energy += lr * (g * g);
    }
    energies[t] = energy.value();
    if (!(energies[t] > 0.0)) {
      throw DomainError("step " + std::to_string(t + 1) + " has an all-zero gradient; its weight is undefined");
    }
  }
  return weights_from_energies(energies, {}, radius).weights;
}

}  // namespace lrsched
