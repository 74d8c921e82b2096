#pragma once

// Weight <-> schedule calculus and the standard schedule zoo.
//
// Indices in the public API are zero-based: position i corresponds to step
// t = i + 1 of a horizon of T steps.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrsched {

// Strictly positive weights w_1..w_T together with their suffix sums
// s_t = w_{t:T}; s_{T+1} = 0.
class WeightSequence {
 public:
  explicit WeightSequence(std::vector<double> weights);

  static WeightSequence uniform(std::size_t horizon, double value = 1.0);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  // suffix(i) = w_i + ... + w_{T-1} (zero-based); suffix(size()) == 0.
  double suffix(std::size_t i) const { return suffix_[i]; }
  std::span<const double> suffixes() const { return suffix_; }
  double total() const { return suffix_.front(); }

 private:
  std::vector<double> weights_;
  std::vector<double> suffix_;
};

// Nonnegative multipliers eta_1..eta_T.
class Schedule {
 public:
  explicit Schedule(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double max() const { return max_; }

  // True when the largest multiplier is exactly 1.
  bool is_normalized() const { return max_ == 1.0; }

  // Divides every value by the max. Throws DegenerateError if the max is 0.
  Schedule normalized() const;

  Schedule scaled(double factor) const;

  bool operator==(const Schedule& other) const { return values_ == other.values_; }

 private:
  std::vector<double> values_;
  double max_ = 0.0;
};

struct PolyFit {
  double warmup_fraction = 0.0;
  double power = 1.0;
  double rms_residual = 0.0;
};

// eta_t = w_t * w_{t+1:T} / w_{1:T}; eta_T = 0. With normalize, the
// multipliers are divided by their max instead of by w_{1:T}.
Schedule weights_to_schedule(const WeightSequence& w, bool normalize);

// Same map for nonnegative weights with a positive total (zero weights allowed).
Schedule schedule_from_weights(std::span<const double> weights, bool normalize);

// Weights recovered from an arbitrary nonnegative schedule eta_1..eta_{T-1}.
struct Representation {
  std::vector<double> weights;  // w_1..w_T, all >= 0
  std::vector<double> suffix;   // s_1..s_T from the construction
  int precision_bits = 0;
  // max_t |w_t (s_t - w_t) / s_1 - eta_t| / max eta, evaluated at full precision.
  double max_relative_residual = 0.0;

  Schedule schedule(bool normalize) const { return schedule_from_weights(weights, normalize); }

  // Throws DomainError if any recovered weight is exactly zero.
  WeightSequence sequence() const { return WeightSequence(weights); }
};

int default_precision_bits(std::size_t horizon);

// Inverts weights_to_schedule. `eta` has length T-1; the result has length T
// and reproduces eta exactly in exact arithmetic. The construction runs in
// MPFR arithmetic with `precision_bits` bits (>= 4T + 64 required).
Representation schedule_to_weights(std::span<const double> eta,
                                   std::optional<int> precision_bits = std::nullopt);

enum class ScheduleKind { linear, cosine, stepwise, inv_t, inv_sqrt, poly, constant };

struct ScheduleParams {
  double offset = 1.0;  // beta for inv_t / inv_sqrt
  double power = 1.0;   // p for poly
  std::vector<double> milestones{0.3, 0.6, 0.9};
  double decay_factor = 0.1;
};

std::string_view to_string(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);
std::span<const std::string_view> schedule_kind_names();

Schedule make_schedule(ScheduleKind kind, std::size_t horizon, const ScheduleParams& params = {});

// Multiplies by min(t / W, 1) with W = ceil(fraction * T).
Schedule apply_warmup(const Schedule& schedule, double warmup_fraction);

// Best (warmup, power) such that apply_warmup(poly(p), warmup) matches the
// max-normalized input in RMS.
PolyFit fit_poly(const Schedule& schedule);

// Root-mean-square difference between two max-normalized schedules.
double normalized_rms_distance(const Schedule& a, const Schedule& b);

// ceil(fraction * n), tolerant of products like 0.07 * 100 = 7.000000000000001.
std::size_t ceil_fraction(double fraction, std::size_t n);

}  // namespace lrsched
