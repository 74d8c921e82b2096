#include "lrsched/convex_lab.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "lrsched/errors.hpp"
#include "lrsched/kahan.hpp"

namespace lrsched {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

double dot(const Vector& a, const Vector& b) {
  KahanSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc.value();
}

double squared_distance(const Vector& a, const Vector& b) {
  KahanSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc.value();
}

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_run_arguments(const Schedule& schedule, double scale, std::size_t steps) {
  if (steps == 0) throw DomainError("a run needs at least one step");
  if (schedule.size() < steps) throw DomainError("schedule is shorter than the requested number of steps");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
}

}  // namespace

Dataset parse_libsvm(std::string_view text) {
  Dataset data;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const auto label = to_double(tokens[0]);
    if (!label || *label != std::floor(*label)) {
      throw ParseError(line_number, "non-numeric label '" + std::string(tokens[0]) + "'");
    }
    SparseRow row;
    std::uint64_t previous = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const std::string_view token = tokens[k];
      const std::size_t colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_number, "malformed feature '" + std::string(token) + "'");
      }
      std::uint64_t index = 0;
      const std::string_view index_text = token.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
      if (ec != std::errc{} || ptr != index_text.data() + index_text.size()) {
        throw ParseError(line_number, "non-numeric index '" + std::string(index_text) + "'");
      }
      if (index == 0) throw ParseError(line_number, "feature index 0 (indices are 1-based)");
      if (index <= previous) throw ParseError(line_number, "indices not increasing");
      const auto value = to_double(token.substr(colon + 1));
      if (!value) throw ParseError(line_number, "non-numeric value in '" + std::string(token) + "'");
      previous = index;
      row.index.push_back(static_cast<std::uint32_t>(index - 1));
      row.value.push_back(*value);
    }
    data.dimension = std::max<std::size_t>(data.dimension, previous);
    data.rows.push_back(std::move(row));
    data.labels.push_back(static_cast<int>(*label));
    if (end == text.size()) break;
  }
  return data;
}

Dataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_libsvm(buffer.str());
}

Dataset make_synthetic_dataset(std::size_t samples, std::size_t dimension, std::uint64_t seed) {
  if (samples == 0 || dimension == 0) throw DomainError("synthetic data needs samples and features");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vector separator(dimension);
  for (double& v : separator) v = normal(rng);
  const double bias = 0.5 * normal(rng);
  const double norm = std::sqrt(static_cast<double>(dimension));

  Dataset data;
  data.dimension = dimension;
  data.rows.reserve(samples);
  data.labels.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    SparseRow row;
    double score = bias;
    for (std::size_t j = 0; j < dimension; ++j) {
      const double f = normal(rng);
      row.index.push_back(static_cast<std::uint32_t>(j));
      row.value.push_back(f);
      score += separator[j] * f / norm;
    }
    int label = score > 0.0 ? 1 : 0;
    if (uniform(rng) < 0.1) label = 1 - label;
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

LogisticRegression::LogisticRegression(Dataset data, std::size_t batch_size)
    : data_(std::move(data)), batch_size_(batch_size) {
  if (data_.rows.empty()) throw DomainError("logistic regression needs at least one sample");
  if (data_.rows.size() != data_.labels.size()) throw DomainError("rows and labels differ in count");
  if (batch_size_ == 0) throw DomainError("batch size must be positive");
  std::map<int, std::size_t> classes;
  for (int label : data_.labels) classes.emplace(label, 0);
  std::size_t next = 0;
  for (auto& [label, index] : classes) index = next++;
  classes_ = std::max<std::size_t>(2, classes.size());
  class_of_.reserve(data_.labels.size());
  for (int label : data_.labels) class_of_.push_back(classes.at(label));
  for (const auto& row : data_.rows) {
    for (double v : row.value) {
      if (!std::isfinite(v)) throw DomainError("features must be finite");
    }
  }
}

void LogisticRegression::logits(const Vector& x, std::size_t row, std::vector<double>& out) const {
  const std::size_t stride = data_.dimension + 1;
  const SparseRow& r = data_.rows[row];
  out.assign(classes_, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    const double* w = x.data() + c * stride;
    double z = w[data_.dimension];
    for (std::size_t k = 0; k < r.index.size(); ++k) z += w[r.index[k]] * r.value[k];
    out[c] = z;
  }
}

double LogisticRegression::loss(const Vector& x) const {
  std::vector<double> z;
  KahanSum total;
  for (std::size_t i = 0; i < data_.rows.size(); ++i) {
    logits(x, i, z);
    const double peak = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - peak);
    total += peak + std::log(sum) - z[class_of_[i]];
  }
  return total.value() / static_cast<double>(data_.rows.size());
}

double LogisticRegression::error_rate(const Vector& x) const {
  std::vector<double> z;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data_.rows.size(); ++i) {
    logits(x, i, z);
    const auto predicted = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (predicted != class_of_[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data_.rows.size());
}

void LogisticRegression::accumulate_gradient(const Vector& x, std::size_t row, double weight,
                                             std::vector<double>& scratch, Vector& out) const {
  logits(x, row, scratch);
  const double peak = *std::max_element(scratch.begin(), scratch.end());
  double sum = 0.0;
  for (double& v : scratch) {
    v = std::exp(v - peak);
    sum += v;
  }
  const std::size_t stride = data_.dimension + 1;
  const SparseRow& r = data_.rows[row];
  for (std::size_t c = 0; c < classes_; ++c) {
    const double coefficient = weight * (scratch[c] / sum - (c == class_of_[row] ? 1.0 : 0.0));
    double* g = out.data() + c * stride;
    for (std::size_t k = 0; k < r.index.size(); ++k) g[r.index[k]] += coefficient * r.value[k];
    g[data_.dimension] += coefficient;
  }
}

void LogisticRegression::minibatch_gradient(const Vector& x, Rng& rng, Vector& out) const {
  out.assign(dimension(), 0.0);
  std::vector<double> scratch;
  const double weight = 1.0 / static_cast<double>(batch_size_);
  const std::uint64_t n = data_.rows.size();
  for (std::size_t b = 0; b < batch_size_; ++b) {
    accumulate_gradient(x, static_cast<std::size_t>(rng() % n), weight, scratch, out);
  }
}

void LogisticRegression::full_gradient(const Vector& x, Vector& out) const {
  out.assign(dimension(), 0.0);
  std::vector<double> scratch;
  const double weight = 1.0 / static_cast<double>(data_.rows.size());
  for (std::size_t i = 0; i < data_.rows.size(); ++i) accumulate_gradient(x, i, weight, scratch, out);
}

Problem::Problem(std::variant<AbsLipschitz, LogisticRegression> model, Vector start, std::string name)
    : model_(std::move(model)), start_(std::move(start)), name_(std::move(name)) {}

Problem Problem::abs_lipschitz(double lipschitz, Vector optimum, Vector start) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw DomainError("Lipschitz constant must be positive");
  if (optimum.empty() || optimum.size() != start.size()) throw DomainError("optimum and start differ in dimension");
  if (!all_finite(optimum) || !all_finite(start)) throw DomainError("optimum and start must be finite");
  std::ostringstream name;
  name << "abs(G=" << lipschitz << ",d=" << optimum.size() << ")";
  return Problem(AbsLipschitz{lipschitz, std::move(optimum)}, std::move(start), name.str());
}

Problem Problem::synthetic_logreg(std::size_t samples, std::size_t dimension, std::uint64_t seed,
                                  std::size_t batch_size) {
  LogisticRegression model(make_synthetic_dataset(samples, dimension, seed), batch_size);
  Vector start(model.dimension(), 0.0);
  std::ostringstream name;
  name << "synthetic_logreg(n=" << samples << ",d=" << dimension << ",seed=" << seed << ")";
  return Problem(std::move(model), std::move(start), name.str());
}

Problem Problem::libsvm_logreg(Dataset data, std::string name, std::size_t batch_size) {
  LogisticRegression model(std::move(data), batch_size);
  Vector start(model.dimension(), 0.0);
  return Problem(std::move(model), std::move(start), "libsvm:" + name);
}

double Problem::loss(const Vector& x) const {
  if (const auto* abs = std::get_if<AbsLipschitz>(&model_)) {
    return abs->lipschitz * std::sqrt(squared_distance(x, abs->optimum));
  }
  return std::get<LogisticRegression>(model_).loss(x);
}

std::optional<double> Problem::error_rate(const Vector& x) const {
  if (const auto* lr = std::get_if<LogisticRegression>(&model_)) return lr->error_rate(x);
  return std::nullopt;
}

std::optional<double> Problem::optimal_value() const {
  if (std::holds_alternative<AbsLipschitz>(model_)) return 0.0;
  return std::nullopt;
}

std::optional<Vector> Problem::comparator() const {
  if (const auto* abs = std::get_if<AbsLipschitz>(&model_)) return abs->optimum;
  return std::nullopt;
}

std::optional<double> Problem::lipschitz() const {
  if (const auto* abs = std::get_if<AbsLipschitz>(&model_)) return abs->lipschitz;
  return std::nullopt;
}

void Problem::gradient(const Vector& x, Rng& rng, Vector& out) const {
  if (const auto* abs = std::get_if<AbsLipschitz>(&model_)) {
    out.assign(x.size(), 0.0);
    const double distance = std::sqrt(squared_distance(x, abs->optimum));
    if (distance == 0.0) return;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = abs->lipschitz * (x[i] - abs->optimum[i]) / distance;
    return;
  }
  std::get<LogisticRegression>(model_).minibatch_gradient(x, rng, out);
}

namespace {

struct RunState {
  RunReport report;
  std::vector<double> l2;
  std::vector<double> l1;
  std::vector<double> primary;
  std::optional<Vector> comparator;
  KahanSum regret;
};

RunState start_run(const Problem& problem, const Schedule& schedule, double scale, std::size_t steps,
                   std::uint64_t seed, std::string optimizer) {
  check_run_arguments(schedule, scale, steps);
  RunState state;
  state.report.problem = problem.name();
  state.report.optimizer = std::move(optimizer);
  state.report.schedule_digest = schedule_digest(schedule);
  state.report.seed = seed;
  state.report.steps = steps;
  state.report.scale = scale;
  state.l2.reserve(steps);
  state.l1.reserve(steps);
  state.comparator = problem.comparator();
  return state;
}

void observe_gradient(RunState& state, const Vector& x, const Vector& g, std::size_t step) {
  if (!all_finite(g)) throw DivergenceError(step, "non-finite gradient");
  double sq = 0.0;
  double abs_sum = 0.0;
  for (double v : g) {
    sq += v * v;
    abs_sum += std::abs(v);
  }
  state.l2.push_back(std::sqrt(sq));
  state.l1.push_back(abs_sum);
  if (state.comparator) {
    double inner = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) inner += g[i] * (x[i] - (*state.comparator)[i]);
    state.regret += inner;
  }
}

RunReport finish_run(RunState state, const Problem& problem, Vector x, NormKind primary_kind) {
  const double loss = problem.loss(x);
  if (!std::isfinite(loss)) throw DivergenceError(state.report.steps, "non-finite loss");
  RunReport& report = state.report;
  report.final_loss = loss;
  report.final_error_rate = problem.error_rate(x);
  if (const auto best = problem.optimal_value()) report.final_suboptimality = loss - *best;
  if (state.comparator) report.regret_vs_u = state.regret.value();
  report.norm_log = GradientNormLog::sequential(
      primary_kind == NormKind::l2 ? std::move(state.l2) : std::move(state.primary), primary_kind);
  report.l1_log = GradientNormLog::sequential(std::move(state.l1), NormKind::l1);
  report.final_point = std::move(x);
  return std::move(state.report);
}

}  // namespace

RunReport run_sgd(const Problem& problem, const Schedule& schedule, double scale, std::size_t steps,
                  std::uint64_t seed, const RunOptions& options) {
  RunState state = start_run(problem, schedule, scale, steps, seed, "sgd");
  Rng rng(seed);
  Vector x = problem.initial_point();
  Vector g;
  if (options.record_iterates) state.report.iterates.push_back(x);
  for (std::size_t t = 0; t < steps; ++t) {
    problem.gradient(x, rng, g);
    observe_gradient(state, x, g, t + 1);
    const double step = scale * schedule[t];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step * g[i];
    if (!all_finite(x)) throw DivergenceError(t + 1, "non-finite iterate");
    if (options.record_iterates) state.report.iterates.push_back(x);
  }
  return finish_run(std::move(state), problem, std::move(x), NormKind::l2);
}

RunReport run_adam_like(const Problem& problem, const Schedule& schedule, double scale, std::size_t steps,
                        std::uint64_t seed, double beta2, const RunOptions& options) {
  if (!(beta2 > 0.0) || !(beta2 < 1.0)) throw DomainError("beta2 must lie in (0, 1)");
  RunState state = start_run(problem, schedule, scale, steps, seed, "adam_like");
  state.primary.reserve(steps);
  Rng rng(seed);
  Vector x = problem.initial_point();
  Vector g;
  Vector v(x.size(), 0.0);
  double beta_power = 1.0;
  if (options.record_iterates) state.report.iterates.push_back(x);
  for (std::size_t t = 0; t < steps; ++t) {
    problem.gradient(x, rng, g);
    observe_gradient(state, x, g, t + 1);
    beta_power *= beta2;
    const double correction = 1.0 - beta_power;
    const double step = scale * schedule[t];
    double weighted = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double denom = std::sqrt(v[i] / correction + kAdamEpsilon);
      weighted += g[i] * g[i] / denom;
      x[i] -= step * g[i] / denom;
    }
    state.primary.push_back(weighted);
    if (!all_finite(x)) throw DivergenceError(t + 1, "non-finite iterate");
    if (options.record_iterates) state.report.iterates.push_back(x);
  }
  return finish_run(std::move(state), problem, std::move(x), NormKind::adam_weighted);
}

std::vector<Vector> scheduled_reduction(std::span<const Vector> updates, const WeightSequence& w,
                                        const Vector& start) {
  if (updates.size() + 1 != w.size()) throw DomainError("reduction needs T - 1 updates for T weights");
  for (const Vector& delta : updates) {
    if (delta.size() != start.size()) throw DomainError("update dimension differs from the start point");
  }
  std::vector<Vector> points;
  points.reserve(w.size());
  points.push_back(start);
  for (std::size_t t = 0; t < updates.size(); ++t) {
    const double factor = w.suffix(t + 1) / w.total();
    Vector next = points.back();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += factor * updates[t][i];
    points.push_back(std::move(next));
  }
  return points;
}

Trajectory run_weighted_ogd(const Problem& problem, const WeightSequence& w, std::uint64_t seed) {
  const std::size_t T = w.size();
  const double reference = problem.optimal_value().value_or(0.0);
  Rng rng(seed);
  Trajectory traj;
  traj.base_points.push_back(problem.initial_point());
  traj.scheduled_points.push_back(problem.initial_point());
  Vector g;
  for (std::size_t t = 0; t < T; ++t) {
    const Vector& x = traj.scheduled_points.back();
    problem.gradient(x, rng, g);
    if (!all_finite(g)) throw DivergenceError(t + 1, "non-finite gradient");
    traj.suboptimality.push_back(problem.loss(x) - reference);

    Vector delta(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) delta[i] = -w[t] * g[i];
    Vector z = traj.base_points.back();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += delta[i];
    if (t + 1 < T) {
      const double factor = w.suffix(t + 1) / w.total();
      Vector next = x;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += factor * delta[i];
      traj.scheduled_points.push_back(std::move(next));
    }
    traj.gradients.push_back(g);
    traj.updates.push_back(std::move(delta));
    traj.base_points.push_back(std::move(z));
  }
  return traj;
}

SidePair regret(const Trajectory& trajectory, const WeightSequence& w, const Vector& comparator) {
  const std::size_t T = w.size();
  if (trajectory.gradients.size() != T || trajectory.base_points.size() != T + 1) {
    throw DomainError("trajectory length does not match the weights");
  }
  KahanSum lhs;
  KahanSum energy;
  for (std::size_t t = 0; t < T; ++t) {
    const Vector& g = trajectory.gradients[t];
    const Vector& z = trajectory.base_points[t];
    KahanSum inner;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * (z[i] - comparator[i]);
    lhs += w[t] * inner.value();
    energy += w[t] * w[t] * dot(g, g);
  }
  const double rhs = 0.5 * squared_distance(trajectory.base_points.front(), comparator) -
                     0.5 * squared_distance(trajectory.base_points.back(), comparator) + 0.5 * energy.value();
  return {lhs.value(), rhs};
}

std::string schedule_digest(const Schedule& schedule) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (double v : schedule.values()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      hash ^= bits & 0xffU;
      hash *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  std::ostringstream out;
  out << "T=" << schedule.size() << ";max=" << std::setprecision(17) << schedule.max() << ";fnv1a=" << std::hex
      << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

}  // namespace lrsched
