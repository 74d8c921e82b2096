#pragma once

// Two-phase schedule comparison: a baseline run per seed, a refined schedule
// built from that run's gradient-norm log, then every requested schedule
// rerun on the same seeds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrsched/convex_lab.hpp"
#include "lrsched/refinement.hpp"
#include "lrsched/schedule_core.hpp"

namespace lrsched {

enum class Optimizer { sgd, adam_like };

std::string_view to_string(Optimizer optimizer);
std::optional<Optimizer> parse_optimizer(std::string_view name);

inline constexpr std::string_view kRefinedSchedule = "refined";

struct ExperimentConfig {
  // Zoo kinds by name, plus "refined".
  std::vector<std::string> schedules{"linear", std::string(kRefinedSchedule)};
  std::vector<std::uint64_t> seeds{1};
  std::size_t steps = 1000;
  double scale = 0.01;
  Optimizer optimizer = Optimizer::adam_like;
  double beta2 = 0.95;
  ScheduleParams params;
  double warmup_fraction = 0.0;
  ScheduleKind baseline = ScheduleKind::linear;
  // Default weighting for the optimizer when unset: inverse l1 for the
  // Adam-like runner, inverse squared l2 for SGD.
  RefinementConfig refinement{.tau = 0.1, .weighting = Weighting::inv_l1};
  bool weighting_set = false;

  void validate() const;
  Weighting effective_weighting() const;
};

struct RunOutcome {
  std::string schedule;
  std::uint64_t seed = 0;
  std::optional<RunReport> report;  // empty when the run failed
  std::string error;
};

struct Statistic {
  std::size_t count = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample standard deviation / sqrt(count); 0 for one value
};

Statistic summarize(std::vector<double> values);

struct SummaryRow {
  std::string schedule;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::optional<Statistic> final_loss;
  std::optional<Statistic> final_error_rate;
  std::optional<Statistic> final_suboptimality;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;  // schedule-major, seeds ascending
  std::vector<SummaryRow> rows;  // in config order
  std::optional<GradientNormLog> baseline_log;  // from the smallest seed, if that run succeeded

  bool all_failed() const;
};

ExperimentResult run_experiment(const Problem& problem, const ExperimentConfig& config);

}  // namespace lrsched
