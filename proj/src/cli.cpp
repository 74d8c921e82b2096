#include "lrsched/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrsched/bounds.hpp"
#include "lrsched/errors.hpp"
#include "lrsched/experiment.hpp"
#include "lrsched/io.hpp"
#include "lrsched/svg.hpp"

namespace lrsched::cli {

namespace {

namespace fs = std::filesystem;

// Raised for problems with the invocation itself rather than its values.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(std::span<const std::string_view> names) {
  std::string out;
  for (std::string_view n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

void check_output_path(const std::string& path) {
  if (path.empty() || path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) throw UsageError("output directory does not exist: " + parent.string());
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::string_view contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::write_file(path, contents);
  }
}

std::string read_input(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

std::string with_file(const std::string& path, const ParseError& e) { return path + ": " + e.what(); }

// ---- refine --------------------------------------------------------------

struct RefineArgs {
  std::string norms_file;
  double tau = 0.1;
  std::string weighting;
  std::string zero_policy = "error";
  double epsilon = 1e-3;
  std::string kind;
  std::string out;
  std::string plot;
};

int cmd_refine(const RefineArgs& a, std::ostream& out, std::ostream& err) {
  check_output_path(a.out);
  check_output_path(a.plot);
  std::optional<NormKind> kind;
  if (!a.kind.empty()) {
    kind = parse_norm_kind(a.kind);
    if (!kind) throw UsageError("unknown norm kind '" + a.kind + "' (expected l2, l1, adam_weighted)");
  }
  GradientNormLog log;
  try {
    log = io::parse_norm_log(read_input(a.norms_file), kind);
  } catch (const ParseError& e) {
    throw UsageError(with_file(a.norms_file, e));
  }

  RefinementConfig config;
  config.tau = a.tau;
  config.weighting = default_weighting(log.kind());
  if (!a.weighting.empty()) {
    const auto w = parse_weighting(a.weighting);
    if (!w) throw UsageError("unknown weighting '" + a.weighting + "' (expected inv_sq_l2, inv_l1, inv_adam_weighted)");
    config.weighting = *w;
  }
  if (a.zero_policy == "clamp") {
    config.zero_policy = ZeroPolicy::clamp;
  } else if (a.zero_policy != "error") {
    throw UsageError("unknown zero policy '" + a.zero_policy + "' (expected error, clamp)");
  }
  config.epsilon_fraction = a.epsilon;

  const RefinementResult result = refine(log, config);
  if (result.clamped) {
    err << "warning: some filtered norms were below " << io::format_double(a.epsilon)
        << " of the max and were clamped\n";
  }
  emit(a.out, io::schedule_to_csv(result.schedule), out);

  if (!a.plot.empty()) {
    const std::vector<double> raw(log.norms().begin(), log.norms().end());
    const std::vector<double> sched(result.schedule.values().begin(), result.schedule.values().end());
    const std::vector<svg::Panel> panels{
        {"gradient norms (" + std::string(to_string(log.kind())) + ")",
         {{"raw", raw, "#9aa5b1"}, {"median filtered", result.filtered, "#d62728"}},
         true},
        {"refined schedule", {{"multiplier", sched, "#1f77b4"}}, false},
    };
    io::write_file(a.plot, svg::render(panels));
  }
  return kExitOk;
}

// ---- schedule ------------------------------------------------------------

struct ScheduleArgs {
  std::string kind;
  std::size_t steps = 0;
  double warmup = 0.0;
  double power = 1.0;
  double offset = 1.0;
  std::vector<double> milestones{0.3, 0.6, 0.9};
  double decay_factor = 0.1;
  std::string out;
};

int cmd_schedule(const ScheduleArgs& a, std::ostream& out, std::ostream&) {
  check_output_path(a.out);
  const auto kind = parse_schedule_kind(a.kind);
  if (!kind) throw UsageError("unknown schedule kind '" + a.kind + "'; known kinds: " + join(schedule_kind_names()));
  ScheduleParams params;
  params.power = a.power;
  params.offset = a.offset;
  params.milestones = a.milestones;
  params.decay_factor = a.decay_factor;
  const Schedule s = apply_warmup(make_schedule(*kind, a.steps, params), a.warmup).normalized();
  emit(a.out, io::schedule_to_csv(s), out);
  return kExitOk;
}

// ---- bound ---------------------------------------------------------------

struct BoundArgs {
  std::string eta_file;
  std::string norms_file;
  std::optional<double> lipschitz;
  double distance = 1.0;
};

int cmd_bound(const BoundArgs& a, std::ostream& out, std::ostream&) {
  if (a.norms_file.empty() && !a.lipschitz) throw UsageError("supply either --norms-file or --G");
  if (!a.norms_file.empty() && a.lipschitz) throw UsageError("--norms-file and --G are mutually exclusive");
  Schedule eta({0.0});
  try {
    eta = io::parse_schedule_csv(read_input(a.eta_file));
  } catch (const ParseError& e) {
    throw UsageError(with_file(a.eta_file, e));
  }
  BoundReport report;
  if (a.lipschitz) {
    report = anyeta_bound(eta, *a.lipschitz, a.distance);
  } else {
    GradientNormLog log;
    try {
      log = io::parse_norm_log(read_input(a.norms_file));
    } catch (const ParseError& e) {
      throw UsageError(with_file(a.norms_file, e));
    }
    report = anyeta_bound(eta, log.norms(), a.distance);
  }
  out << io::to_json(report) << '\n';
  return kExitOk;
}

// ---- fit-poly ------------------------------------------------------------

int cmd_fit_poly(const std::string& schedule_file, std::ostream& out) {
  Schedule s({0.0});
  try {
    s = io::parse_schedule_csv(read_input(schedule_file));
  } catch (const ParseError& e) {
    throw UsageError(with_file(schedule_file, e));
  }
  out << io::to_json(fit_poly(s)) << '\n';
  return kExitOk;
}

// ---- simulate ------------------------------------------------------------

inline constexpr double kDefaultLogregScale = 0.05;

struct SimulateArgs {
  std::string problem = "synthetic";
  std::vector<std::string> schedules{"linear", "refined"};
  std::size_t seeds = 5;
  std::uint64_t seed_base = 1;
  std::size_t steps = 1000;
  std::optional<double> scale;
  std::string optimizer;
  double beta2 = 0.95;
  double tau = 0.1;
  std::string weighting;
  double warmup = 0.0;
  // abs problem
  double lipschitz = 1.0;
  double distance = 1.0;
  std::size_t dimension = 1;
  // logistic problems
  std::size_t samples = 512;
  std::size_t features = 10;
  std::uint64_t data_seed = 7;
  std::size_t batch = 16;
  std::string out;
  std::string log;
  std::string norm_log;
};

std::string optional_field(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  check_output_path(a.out);
  check_output_path(a.log);
  check_output_path(a.norm_log);
  if (a.seeds == 0) throw UsageError("--seeds must be at least 1");

  bool is_abs = false;
  std::optional<Problem> problem;
  if (a.problem == "abs") {
    is_abs = true;
    Vector optimum(a.dimension, 0.0);
    Vector start(a.dimension, 0.0);
    if (a.dimension == 0) throw UsageError("--dimension must be at least 1");
    start[0] = a.distance;
    problem = Problem::abs_lipschitz(a.lipschitz, optimum, start);
  } else if (a.problem == "synthetic") {
    problem = Problem::synthetic_logreg(a.samples, a.features, a.data_seed, a.batch);
  } else if (a.problem.rfind("libsvm:", 0) == 0) {
    const std::string path = a.problem.substr(7);
    Dataset data;
    try {
      data = parse_libsvm(read_input(path));
    } catch (const ParseError& e) {
      throw UsageError(with_file(path, e));
    }
    problem = Problem::libsvm_logreg(std::move(data), fs::path(path).filename().string(), a.batch);
  } else {
    throw UsageError("unknown problem '" + a.problem + "' (expected abs, synthetic, libsvm:PATH)");
  }

  ExperimentConfig config;
  config.schedules = a.schedules;
  for (const std::string& name : config.schedules) {
    if (name != kRefinedSchedule && !parse_schedule_kind(name)) {
      throw UsageError("unknown schedule '" + name + "'; known: " + join(schedule_kind_names()) + ", refined");
    }
  }
  config.seeds.clear();
  for (std::size_t i = 0; i < a.seeds; ++i) config.seeds.push_back(a.seed_base + i);
  config.steps = a.steps;
  if (a.optimizer.empty()) {
    config.optimizer = is_abs ? Optimizer::sgd : Optimizer::adam_like;
  } else {
    const auto opt = parse_optimizer(a.optimizer);
    if (!opt) throw UsageError("unknown optimizer '" + a.optimizer + "' (expected sgd, adam_like)");
    config.optimizer = *opt;
  }
  const double dg_over_sqrt_t = a.distance * a.lipschitz / std::sqrt(static_cast<double>(a.steps));
  config.scale = a.scale.value_or(is_abs ? a.distance / (a.lipschitz * std::sqrt(static_cast<double>(a.steps)))
                                         : kDefaultLogregScale);
  config.beta2 = a.beta2;
  config.warmup_fraction = a.warmup;
  config.refinement.tau = a.tau;
  if (!a.weighting.empty()) {
    const auto w = parse_weighting(a.weighting);
    if (!w) throw UsageError("unknown weighting '" + a.weighting + "'");
    config.refinement.weighting = *w;
    config.weighting_set = true;
  }

  const ExperimentResult result = run_experiment(*problem, config);

  std::ostringstream table;
  table << "schedule,optimizer,steps,scale,runs,failures,loss_mean,loss_se,error_mean,error_se,"
           "suboptimality_mean,suboptimality_se,bound\n";
  for (const SummaryRow& row : result.rows) {
    const auto mean = [](const std::optional<Statistic>& s) {
      return s ? std::optional<double>(s->mean) : std::nullopt;
    };
    const auto se = [](const std::optional<Statistic>& s) {
      return s ? std::optional<double>(s->standard_error) : std::nullopt;
    };
    table << row.schedule << ',' << to_string(config.optimizer) << ',' << config.steps << ','
          << io::format_double(config.scale) << ',' << row.runs << ',' << row.failures << ','
          << optional_field(mean(row.final_loss)) << ',' << optional_field(se(row.final_loss)) << ','
          << optional_field(mean(row.final_error_rate)) << ',' << optional_field(se(row.final_error_rate)) << ','
          << optional_field(mean(row.final_suboptimality)) << ',' << optional_field(se(row.final_suboptimality))
          << ',' << (is_abs ? io::format_double(dg_over_sqrt_t) : std::string()) << '\n';
  }
  emit(a.out, table.str(), out);

  if (!a.log.empty()) {
    std::string lines;
    for (const RunOutcome& run : result.runs) {
      if (run.report) {
        lines += io::to_json_line(*run.report, run.schedule);
      } else {
        nlohmann::json j = {{"status", "failed"}, {"schedule", run.schedule}, {"seed", run.seed}, {"error", run.error}};
        lines += j.dump();
      }
      lines += '\n';
    }
    io::write_file(a.log, lines);
  }
  if (!a.norm_log.empty()) {
    if (!result.baseline_log) throw DomainError("no baseline norm log: add 'refined' to --schedules");
    io::write_file(a.norm_log, io::norm_log_to_csv(*result.baseline_log));
  }

  for (const RunOutcome& run : result.runs) {
    if (!run.report) err << "run failed: schedule " << run.schedule << ", seed " << run.seed << ": " << run.error << '\n';
  }
  return result.all_failed() ? kExitDomain : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-rate schedule toolkit: refinement from gradient norms, schedule zoo, bounds, experiments",
               "lrsched"};
  app.require_subcommand(1);

  RefineArgs refine_args;
  auto* refine_cmd = app.add_subcommand("refine", "Build a refined schedule from a gradient-norm log");
  refine_cmd->add_option("norms-file,--norms-file", refine_args.norms_file, "Norm log (CSV or JSON-lines)")
      ->required()
      ->check(CLI::ExistingFile);
  refine_cmd->add_option("--tau", refine_args.tau, "Median-filter width as a fraction of T")->capture_default_str();
  refine_cmd->add_option("--weighting", refine_args.weighting, "inv_sq_l2 | inv_l1 | inv_adam_weighted");
  refine_cmd->add_option("--zero-policy", refine_args.zero_policy, "error | clamp")->capture_default_str();
  refine_cmd->add_option("--epsilon", refine_args.epsilon, "Clamp floor relative to the max norm")
      ->capture_default_str();
  refine_cmd->add_option("--kind", refine_args.kind, "Override the log's norm kind: l2 | l1 | adam_weighted");
  refine_cmd->add_option("--out,-o", refine_args.out, "Schedule CSV (stdout if omitted)");
  refine_cmd->add_option("--plot", refine_args.plot, "SVG with norms and the refined schedule");

  ScheduleArgs schedule_args;
  auto* schedule_cmd = app.add_subcommand("schedule", "Emit a normalized schedule from the standard zoo");
  schedule_cmd->add_option("--kind", schedule_args.kind, "Schedule kind")->required();
  schedule_cmd->add_option("--steps", schedule_args.steps, "Horizon T")->required()->check(CLI::PositiveNumber);
  schedule_cmd->add_option("--warmup", schedule_args.warmup, "Warmup fraction in [0, 1)")->capture_default_str();
  schedule_cmd->add_option("--power", schedule_args.power, "Exponent for poly")->capture_default_str();
  schedule_cmd->add_option("--offset", schedule_args.offset, "Offset beta for inv_t / inv_sqrt")
      ->capture_default_str();
  schedule_cmd->add_option("--milestones", schedule_args.milestones, "Stepwise milestone fractions")
      ->delimiter(',')
      ->capture_default_str();
  schedule_cmd->add_option("--decay-factor", schedule_args.decay_factor, "Stepwise factor per milestone")
      ->capture_default_str();
  schedule_cmd->add_option("--out,-o", schedule_args.out, "Schedule CSV (stdout if omitted)");

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the last-iterate bound for a schedule");
  bound_cmd->add_option("--eta-file", bound_args.eta_file, "Schedule CSV")->required()->check(CLI::ExistingFile);
  bound_cmd->add_option("--norms-file", bound_args.norms_file, "Per-step gradient norms")->check(CLI::ExistingFile);
  bound_cmd->add_option("--G", bound_args.lipschitz, "Constant gradient norm bound");
  bound_cmd->add_option("--D", bound_args.distance, "Distance to the solution")->capture_default_str();

  std::string fit_file;
  auto* fit_cmd = app.add_subcommand("fit-poly", "Fit warmup + polynomial decay to a schedule");
  fit_cmd->add_option("schedule-file,--schedule-file", fit_file, "Schedule CSV")
      ->required()
      ->check(CLI::ExistingFile);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Compare schedules on a convex problem (baseline, refine, rerun)");
  sim_cmd->add_option("--problem", sim.problem, "abs | synthetic | libsvm:PATH")->capture_default_str();
  sim_cmd->add_option("--schedules", sim.schedules, "Zoo kinds and/or 'refined'")->delimiter(',');
  sim_cmd->add_option("--seeds", sim.seeds, "Number of seeds")->capture_default_str();
  sim_cmd->add_option("--seed-base", sim.seed_base, "First seed")->capture_default_str();
  sim_cmd->add_option("--steps", sim.steps, "Horizon T")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--scale", sim.scale, "Base learning rate (default D/(G sqrt T) for abs)");
  sim_cmd->add_option("--optimizer", sim.optimizer, "sgd | adam_like (default sgd for abs, adam_like otherwise)");
  sim_cmd->add_option("--beta2", sim.beta2, "Second-moment decay for adam_like")->capture_default_str();
  sim_cmd->add_option("--tau", sim.tau, "Refinement smoothing fraction")->capture_default_str();
  sim_cmd->add_option("--weighting", sim.weighting, "Refinement weighting");
  sim_cmd->add_option("--warmup", sim.warmup, "Warmup fraction for zoo schedules")->capture_default_str();
  sim_cmd->add_option("--G", sim.lipschitz, "abs: Lipschitz constant")->capture_default_str();
  sim_cmd->add_option("--D", sim.distance, "abs: distance from start to optimum")->capture_default_str();
  sim_cmd->add_option("--dimension", sim.dimension, "abs: dimension")->capture_default_str();
  sim_cmd->add_option("--samples", sim.samples, "synthetic: rows")->capture_default_str();
  sim_cmd->add_option("--features", sim.features, "synthetic: features")->capture_default_str();
  sim_cmd->add_option("--data-seed", sim.data_seed, "synthetic: data seed")->capture_default_str();
  sim_cmd->add_option("--batch", sim.batch, "Minibatch size")->capture_default_str();
  sim_cmd->add_option("--out,-o", sim.out, "Results CSV (stdout if omitted)");
  sim_cmd->add_option("--log", sim.log, "JSON-lines run log");
  sim_cmd->add_option("--norm-log", sim.norm_log, "Baseline norm log (first seed) as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*refine_cmd) return cmd_refine(refine_args, out, err);
    if (*schedule_cmd) return cmd_schedule(schedule_args, out, err);
    if (*bound_cmd) return cmd_bound(bound_args, out, err);
    if (*fit_cmd) return cmd_fit_poly(fit_file, out);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace lrsched::cli
