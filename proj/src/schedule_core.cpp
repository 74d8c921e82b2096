#include "lrsched/schedule_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "lrsched/errors.hpp"
#include "lrsched/kahan.hpp"
#include "mpfloat.hpp"

namespace lrsched {

namespace {

std::vector<double> suffix_sums(std::span<const double> weights) {
  std::vector<double> suffix(weights.size() + 1, 0.0);
  KahanSum acc;
  for (std::size_t i = weights.size(); i-- > 0;) {
    acc += weights[i];
    suffix[i] = acc.value();
  }
  return suffix;
}

}  // namespace

WeightSequence::WeightSequence(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("weight sequence must have T >= 1");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw DomainError("weight " + std::to_string(i + 1) + " is not a positive finite number");
    }
  }
  suffix_ = suffix_sums(weights_);
}

WeightSequence WeightSequence::uniform(std::size_t horizon, double value) {
  return WeightSequence(std::vector<double>(horizon, value));
}

Schedule::Schedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("schedule must have at least one step");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
      throw DomainError("multiplier at step " + std::to_string(i + 1) + " is negative or not finite");
    }
    max_ = std::max(max_, values_[i]);
  }
}

Schedule Schedule::normalized() const {
  if (max_ == 0.0) throw DegenerateError("degenerate horizon: all multipliers are zero");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] / max_;
  return Schedule(std::move(out));
}

Schedule Schedule::scaled(double factor) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] * factor;
  return Schedule(std::move(out));
}

Schedule schedule_from_weights(std::span<const double> weights, bool normalize) {
  if (weights.empty()) throw DomainError("weight sequence must have T >= 1");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be nonnegative and finite");
  }
  const std::vector<double> suffix = suffix_sums(weights);
  if (!(suffix.front() > 0.0)) throw DomainError("weights sum to zero");

  // raw_t = w_t * s_{t+1}; dividing by s_1 or by max(raw) is a single rounding.
  std::vector<double> raw(weights.size());
  double raw_max = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    raw[i] = weights[i] * suffix[i + 1];
    raw_max = std::max(raw_max, raw[i]);
  }
  const double divisor = normalize ? raw_max : suffix.front();
  if (normalize && raw_max == 0.0) {
    throw DegenerateError("degenerate horizon: T = 1 leaves no room for decay, cannot normalize");
  }
  for (double& r : raw) r /= divisor;
  return Schedule(std::move(raw));
}

Schedule weights_to_schedule(const WeightSequence& w, bool normalize) {
  return schedule_from_weights(w.weights(), normalize);
}

int default_precision_bits(std::size_t horizon) { return static_cast<int>(4 * horizon + 128); }

Representation schedule_to_weights(std::span<const double> eta, std::optional<int> precision_bits) {
  using detail::MpFloat;
  const std::size_t horizon = eta.size() + 1;
  if (eta.empty()) throw DomainError("schedule_to_weights needs at least one multiplier (T >= 2)");
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] >= 0.0) || !std::isfinite(eta[i])) {
      throw DomainError("multiplier at step " + std::to_string(i + 1) + " is negative or not finite");
    }
  }
  // w_T ~ 2^{2T} must still be representable once rounded to double.
  if (horizon > 511) throw DomainError("horizon too large: recovered weights overflow double for T > 511");

  const int bits = precision_bits.value_or(default_precision_bits(horizon));
  const auto minimum = static_cast<int>(4 * horizon + 64);
  if (bits < minimum) {
    throw DomainError("insufficient precision for horizon T=" + std::to_string(horizon) + ": need at least " +
                      std::to_string(minimum) + " bits, got " + std::to_string(bits));
  }
  const auto prec = static_cast<mpfr_prec_t>(bits);

  const double scale = *std::max_element(eta.begin(), eta.end());
  const MpFloat mp_scale(prec, scale);

  std::vector<MpFloat> target;
  target.reserve(eta.size());
  for (double e : eta) {
    MpFloat v(prec, e);
    if (scale > 0.0) v /= mp_scale;
    target.push_back(v);
  }

  const MpFloat s1 = MpFloat::power_of_two(prec, static_cast<long>(2 * horizon));
  const MpFloat four_s1 = MpFloat::power_of_two(prec, static_cast<long>(2 * horizon + 2));
  const MpFloat two_s1 = MpFloat::power_of_two(prec, static_cast<long>(2 * horizon + 1));

  std::vector<MpFloat> w;
  std::vector<MpFloat> s;
  w.reserve(horizon);
  s.reserve(horizon);
  s.push_back(s1);
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    const MpFloat st = s.back();
    const MpFloat disc = st * st - four_s1 * target[t];
    if (disc.sign() < 0) throw std::logic_error("negative discriminant in weight construction");
    // Smaller root of w^2 - s_t w + s_1 eta_t = 0, in cancellation-free form.
    const MpFloat root = (two_s1 * target[t]) / (st + sqrt(disc));
    w.push_back(root);
    s.push_back(st - root);
  }
  w.push_back(s.back());

  Representation rep;
  rep.precision_bits = bits;
  MpFloat worst(prec, 0.0);
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    const MpFloat residual = abs(w[t] * (s[t] - w[t]) / s1 - target[t]);
    if (worst < residual) worst = residual;
  }
  rep.max_relative_residual = worst.to_double();

  rep.weights.reserve(horizon);
  rep.suffix.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    MpFloat wt = w[t];
    MpFloat st = s[t];
    if (scale > 0.0) {
      wt *= mp_scale;
      st *= mp_scale;
    }
    rep.weights.push_back(wt.to_double());
    rep.suffix.push_back(st.to_double());
  }
  return rep;
}

namespace {

constexpr std::array<std::string_view, 7> kKindNames{"linear", "cosine", "stepwise", "inv_t",
                                                     "inv_sqrt", "poly", "constant"};

}  // namespace

std::string_view to_string(ScheduleKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ScheduleKind>(i);
  }
  return std::nullopt;
}

std::span<const std::string_view> schedule_kind_names() { return kKindNames; }

std::size_t ceil_fraction(double fraction, std::size_t n) {
  const double product = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(product - 1e-9 * std::max(1.0, product)));
}

Schedule make_schedule(ScheduleKind kind, std::size_t horizon, const ScheduleParams& params) {
  if (horizon == 0) throw DomainError("schedule horizon must be at least 1");
  const auto T = static_cast<double>(horizon);
  std::vector<double> values(horizon);

  switch (kind) {
    case ScheduleKind::linear:
      for (std::size_t i = 0; i < horizon; ++i) values[i] = static_cast<double>(horizon - i - 1) / T;
      break;
    case ScheduleKind::poly:
      if (!(params.power > 0.0) || !std::isfinite(params.power)) throw DomainError("poly power must be positive");
      for (std::size_t i = 0; i < horizon; ++i) {
        values[i] = std::pow(static_cast<double>(horizon - i - 1) / T, params.power);
      }
      break;
    case ScheduleKind::cosine:
      for (std::size_t i = 0; i < horizon; ++i) {
        values[i] = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(i) / T));
      }
      break;
    case ScheduleKind::stepwise: {
      if (!(params.decay_factor > 0.0) || !std::isfinite(params.decay_factor)) {
        throw DomainError("stepwise decay factor must be positive");
      }
      std::vector<std::size_t> boundaries;
      double previous = 0.0;
      for (double m : params.milestones) {
        if (!(m > previous) || !(m < 1.0)) {
          throw DomainError("stepwise milestones must be strictly increasing fractions in (0, 1)");
        }
        previous = m;
        boundaries.push_back(ceil_fraction(m, horizon));
      }
      for (std::size_t i = 0; i < horizon; ++i) {
        const auto passed = std::count_if(boundaries.begin(), boundaries.end(),
                                          [i](std::size_t b) { return i >= b; });
        values[i] = std::pow(params.decay_factor, static_cast<double>(passed));
      }
      break;
    }
    case ScheduleKind::inv_t:
    case ScheduleKind::inv_sqrt: {
      const double beta = params.offset;
      if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("offset beta must be positive");
      for (std::size_t i = 0; i < horizon; ++i) {
        const double denom = beta + static_cast<double>(i);
        values[i] = kind == ScheduleKind::inv_t ? beta / denom : std::sqrt(beta) / std::sqrt(denom);
      }
      break;
    }
    case ScheduleKind::constant:
      std::fill(values.begin(), values.end(), 1.0);
      break;
  }
  return Schedule(std::move(values));
}

Schedule apply_warmup(const Schedule& schedule, double warmup_fraction) {
  if (!(warmup_fraction >= 0.0) || !(warmup_fraction < 1.0)) {
    throw DomainError("warmup fraction must lie in [0, 1)");
  }
  if (warmup_fraction == 0.0) return schedule;
  const std::size_t horizon = schedule.size();
  const std::size_t ramp = std::max<std::size_t>(1, ceil_fraction(warmup_fraction, horizon));
  std::vector<double> out(schedule.values().begin(), schedule.values().end());
  for (std::size_t i = 0; i + 1 < ramp && i < horizon; ++i) {
    out[i] *= static_cast<double>(i + 1) / static_cast<double>(ramp);
  }
  return Schedule(std::move(out));
}

double normalized_rms_distance(const Schedule& a, const Schedule& b) {
  if (a.size() != b.size()) throw DomainError("schedules differ in length");
  const Schedule na = a.normalized();
  const Schedule nb = b.normalized();
  KahanSum acc;
  for (std::size_t i = 0; i < na.size(); ++i) {
    const double d = na[i] - nb[i];
    acc += d * d;
  }
  return std::sqrt(acc.value() / static_cast<double>(na.size()));
}

namespace {

// RMS between a max-normalized target and normalized warmup(poly(power), ramp).
class PolyObjective {
 public:
  explicit PolyObjective(std::span<const double> target) : target_(target), candidate_(target.size()) {}

  double operator()(std::size_t ramp, double power) {
    const std::size_t n = target_.size();
    const auto T = static_cast<double>(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::pow(static_cast<double>(n - i - 1) / T, power);
      if (i + 1 < ramp) v *= static_cast<double>(i + 1) / static_cast<double>(ramp);
      candidate_[i] = v;
      peak = std::max(peak, v);
    }
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = target_[i] - candidate_[i] / peak;
      acc += d * d;
    }
    return std::sqrt(acc.value() / T);
  }

 private:
  std::span<const double> target_;
  std::vector<double> candidate_;
};

}  // namespace

PolyFit fit_poly(const Schedule& schedule) {
  if (schedule.size() < 10) throw DomainError("fit_poly needs at least 10 steps");
  if (schedule.max() == 0.0) throw DomainError("cannot fit an all-zero schedule");
  const Schedule target = schedule.normalized();
  PolyObjective objective(target.values());
  const std::size_t horizon = schedule.size();

  auto ramp_for = [horizon](double fraction) {
    return fraction == 0.0 ? std::size_t{0} : std::max<std::size_t>(1, ceil_fraction(fraction, horizon));
  };

  PolyFit best{0.0, 0.1, std::numeric_limits<double>::infinity()};
  for (int r = 0; r <= 50; ++r) {
    const double fraction = r / 100.0;
    const std::size_t ramp = ramp_for(fraction);
    for (int p = 1; p <= 50; ++p) {
      const double power = p / 10.0;
      const double rms = objective(ramp, power);
      if (rms < best.rms_residual) best = {fraction, power, rms};
    }
  }

  // Golden-section refinement of the power inside the winning grid cell.
  const std::size_t ramp = ramp_for(best.warmup_fraction);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(1e-3, best.power - 0.1);
  double hi = best.power + 0.1;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(ramp, c);
  double fd = objective(ramp, d);
  for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(ramp, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(ramp, d);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double refined_rms = objective(ramp, refined);
  if (refined_rms < best.rms_residual) {
    best.power = refined;
    best.rms_residual = refined_rms;
  }
  return best;
}

}  // namespace lrsched
