#include "lrsched/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lrsched/errors.hpp"
#include "lrsched/kahan.hpp"

namespace lrsched {

std::string_view to_string(Optimizer optimizer) {
  return optimizer == Optimizer::sgd ? "sgd" : "adam_like";
}

std::optional<Optimizer> parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam_like" || name == "adam") return Optimizer::adam_like;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (schedules.empty()) throw DomainError("no schedules requested");
  if (seeds.empty()) throw DomainError("no seeds requested");
  if (steps == 0) throw DomainError("steps must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
  for (const std::string& name : schedules) {
    if (name != kRefinedSchedule && !parse_schedule_kind(name)) {
      throw DomainError("unknown schedule '" + name + "'");
    }
  }
  refinement.validate();
  const Weighting w = effective_weighting();
  if (optimizer == Optimizer::sgd && w == Weighting::inv_adam_weighted) {
    throw DomainError("SGD runs do not log Adam-weighted norms");
  }
  if (optimizer == Optimizer::adam_like && w == Weighting::inv_sq_l2) {
    throw DomainError("Adam-like runs log l1 and Adam-weighted norms, not l2");
  }
}

Weighting ExperimentConfig::effective_weighting() const {
  if (weighting_set) return refinement.weighting;
  return optimizer == Optimizer::sgd ? Weighting::inv_sq_l2 : Weighting::inv_l1;
}

Statistic summarize(std::vector<double> values) {
  Statistic stat;
  stat.count = values.size();
  if (values.empty()) return stat;
  std::sort(values.begin(), values.end());
  KahanSum sum;
  for (double v : values) sum += v;
  stat.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    KahanSum squares;
    for (double v : values) squares += (v - stat.mean) * (v - stat.mean);
    const double variance = squares.value() / static_cast<double>(values.size() - 1);
    stat.standard_error = std::sqrt(variance / static_cast<double>(values.size()));
  }
  return stat;
}

bool ExperimentResult::all_failed() const {
  return std::none_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.report.has_value(); });
}

namespace {

RunReport execute(const Problem& problem, const Schedule& schedule, const ExperimentConfig& config,
                  std::uint64_t seed) {
  if (config.optimizer == Optimizer::sgd) return run_sgd(problem, schedule, config.scale, config.steps, seed);
  return run_adam_like(problem, schedule, config.scale, config.steps, seed, config.beta2);
}

Schedule zoo_schedule(ScheduleKind kind, const ExperimentConfig& config) {
  return apply_warmup(make_schedule(kind, config.steps, config.params), config.warmup_fraction);
}

const GradientNormLog& log_for(const RunReport& report, Weighting weighting) {
  return weighting == Weighting::inv_l1 ? report.l1_log : report.norm_log;
}

}  // namespace

ExperimentResult run_experiment(const Problem& problem, const ExperimentConfig& config) {
  config.validate();
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  RefinementConfig refinement = config.refinement;
  refinement.weighting = config.effective_weighting();

  ExperimentResult result;
  const bool wants_refined =
      std::find(config.schedules.begin(), config.schedules.end(), kRefinedSchedule) != config.schedules.end();

  // Baseline runs, one per seed; reused for the matching zoo row.
  const Schedule baseline_schedule = zoo_schedule(config.baseline, config);
  std::map<std::uint64_t, RunOutcome> baseline;
  if (wants_refined) {
    for (std::uint64_t seed : seeds) {
      RunOutcome outcome{std::string(to_string(config.baseline)), seed, std::nullopt, {}};
      try {
        outcome.report = execute(problem, baseline_schedule, config, seed);
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
      baseline.emplace(seed, std::move(outcome));
    }
    const RunOutcome& first = baseline.at(seeds.front());
    if (first.report) result.baseline_log = log_for(*first.report, refinement.weighting);
  }

  for (const std::string& name : config.schedules) {
    SummaryRow row;
    row.schedule = name;
    std::vector<double> losses;
    std::vector<double> errors;
    std::vector<double> subopts;
    for (std::uint64_t seed : seeds) {
      RunOutcome outcome{name, seed, std::nullopt, {}};
      try {
        if (name == kRefinedSchedule) {
          const RunOutcome& base = baseline.at(seed);
          if (!base.report) throw DivergenceError(0, "baseline run failed: " + base.error);
          const Schedule refined = refine(log_for(*base.report, refinement.weighting), refinement).schedule;
          outcome.report = execute(problem, refined, config, seed);
        } else {
          const ScheduleKind kind = *parse_schedule_kind(name);
          if (kind == config.baseline && baseline.count(seed)) {
            outcome = baseline.at(seed);
          } else {
            outcome.report = execute(problem, zoo_schedule(kind, config), config, seed);
          }
        }
      } catch (const std::exception& e) {
        outcome.report.reset();
        outcome.error = e.what();
      }
      ++row.runs;
      if (outcome.report) {
        losses.push_back(outcome.report->final_loss);
        if (outcome.report->final_error_rate) errors.push_back(*outcome.report->final_error_rate);
        if (outcome.report->final_suboptimality) subopts.push_back(*outcome.report->final_suboptimality);
      } else {
        ++row.failures;
      }
      result.runs.push_back(std::move(outcome));
    }
    if (!losses.empty()) row.final_loss = summarize(losses);
    if (!errors.empty()) row.final_error_rate = summarize(errors);
    if (!subopts.empty()) row.final_suboptimality = summarize(subopts);
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace lrsched
