#include "lrsched/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "lrsched/errors.hpp"

namespace lrsched::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits into lines, keeping 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    lines.emplace_back(++number, trim(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

std::optional<double> parse_real(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_integer(std::string_view token) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

struct NormAccumulator {
  std::vector<std::int64_t> steps;
  std::vector<double> norms;
  std::optional<NormKind> declared;

  void add(std::size_t line, std::int64_t step, double norm, std::optional<NormKind> kind) {
    if (step < 1) throw ParseError(line, "step must be a positive integer");
    if (!steps.empty() && step <= steps.back()) throw ParseError(line, "steps not strictly increasing");
    if (std::isnan(norm)) throw ParseError(line, "norm is NaN");
    if (!std::isfinite(norm)) throw ParseError(line, "norm is infinite");
    if (norm < 0.0) throw ParseError(line, "negative norm");
    if (kind) {
      if (declared && *declared != *kind) throw ParseError(line, "mixed norm kinds in one log");
      declared = kind;
    }
    steps.push_back(step);
    norms.push_back(norm);
  }
};

NormKind kind_or_throw(std::size_t line, std::string_view name) {
  const auto kind = parse_norm_kind(name);
  if (!kind) throw ParseError(line, "unknown norm kind '" + std::string(name) + "'");
  return *kind;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string schedule_to_csv(const Schedule& schedule) {
  std::string out = "step,multiplier\n";
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_double(schedule[i]);
    out += '\n';
  }
  return out;
}

Schedule parse_schedule_csv(std::string_view text) {
  std::vector<double> values;
  bool seen_header = false;
  for (const auto& [line, content] : lines_of(text)) {
    if (content.empty()) continue;
    const auto fields = split_commas(content);
    if (!seen_header) {
      if (fields.size() != 2 || fields[0] != "step" || fields[1] != "multiplier") {
        throw ParseError(line, "expected header 'step,multiplier'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != 2) throw ParseError(line, "expected 2 fields");
    const auto step = parse_integer(fields[0]);
    if (!step) throw ParseError(line, "non-numeric step '" + std::string(fields[0]) + "'");
    if (*step != static_cast<std::int64_t>(values.size()) + 1) {
      throw ParseError(line, "expected step " + std::to_string(values.size() + 1));
    }
    const auto value = parse_real(fields[1]);
    if (!value) throw ParseError(line, "non-numeric multiplier '" + std::string(fields[1]) + "'");
    if (!std::isfinite(*value) || *value < 0.0) throw ParseError(line, "multiplier must be finite and nonnegative");
    values.push_back(*value);
  }
  if (!seen_header) throw ParseError(1, "empty schedule file");
  if (values.empty()) throw ParseError(1, "schedule file has no rows");
  return Schedule(std::move(values));
}

std::string norm_log_to_csv(const GradientNormLog& log) {
  std::string out = "step,norm,kind\n";
  const std::string kind(to_string(log.kind()));
  for (std::size_t i = 0; i < log.size(); ++i) {
    out += std::to_string(log.steps()[i]);
    out += ',';
    out += format_double(log.norms()[i]);
    out += ',';
    out += kind;
    out += '\n';
  }
  return out;
}

GradientNormLog parse_norm_log(std::string_view text, std::optional<NormKind> kind) {
  const auto lines = lines_of(text);
  NormAccumulator acc;

  std::size_t first = 0;
  while (first < lines.size() && lines[first].second.empty()) ++first;
  if (first == lines.size()) throw ParseError(1, "empty norm log");

  if (lines[first].second.front() == '{') {
    for (std::size_t i = first; i < lines.size(); ++i) {
      const auto& [line, content] = lines[i];
      if (content.empty()) continue;
      json record;
      try {
        record = json::parse(content);
      } catch (const json::parse_error&) {
        throw ParseError(line, "malformed JSON record");
      }
      if (!record.is_object()) throw ParseError(line, "record is not an object");
      if (!record.contains("step") || !record["step"].is_number_integer()) {
        throw ParseError(line, "missing integer 'step'");
      }
      if (!record.contains("norm") || !record["norm"].is_number()) throw ParseError(line, "missing numeric 'norm'");
      std::optional<NormKind> row_kind;
      if (record.contains("kind")) {
        if (!record["kind"].is_string()) throw ParseError(line, "'kind' must be a string");
        row_kind = kind_or_throw(line, record["kind"].get<std::string>());
      }
      acc.add(line, record["step"].get<std::int64_t>(), record["norm"].get<double>(), row_kind);
    }
  } else {
    const auto header = split_commas(lines[first].second);
    const bool with_kind = header.size() == 3 && header[2] == "kind";
    if (header.size() < 2 || header[0] != "step" || header[1] != "norm" || (header.size() == 3 && !with_kind) ||
        header.size() > 3) {
      throw ParseError(lines[first].first, "expected header 'step,norm' or 'step,norm,kind'");
    }
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
      const auto& [line, content] = lines[i];
      if (content.empty()) continue;
      const auto fields = split_commas(content);
      if (fields.size() != header.size()) {
        throw ParseError(line, "expected " + std::to_string(header.size()) + " fields");
      }
      const auto step = parse_integer(fields[0]);
      if (!step) throw ParseError(line, "non-numeric step '" + std::string(fields[0]) + "'");
      const auto norm = parse_real(fields[1]);
      if (!norm) throw ParseError(line, "non-numeric norm '" + std::string(fields[1]) + "'");
      std::optional<NormKind> row_kind;
      if (with_kind) row_kind = kind_or_throw(line, fields[2]);
      acc.add(line, *step, *norm, row_kind);
    }
  }
  if (acc.norms.empty()) throw ParseError(lines.back().first, "norm log has no records");
  const NormKind resolved = kind.value_or(acc.declared.value_or(NormKind::l2));
  return GradientNormLog(std::move(acc.steps), std::move(acc.norms), resolved);
}

std::string to_json(const BoundReport& report) {
  json j = {{"distance_term", report.distance_term},
            {"variance_term", report.variance_term},
            {"tail_term", report.tail_term},
            {"total", report.total},
            {"inputs_digest", report.inputs_digest}};
  return j.dump(2);
}

std::string to_json(const PolyFit& fit) {
  json j = {{"warmup_fraction", fit.warmup_fraction}, {"power", fit.power}, {"rms_residual", fit.rms_residual}};
  return j.dump(2);
}

std::string to_json_line(const RunReport& report, std::string_view schedule) {
  json j = {{"status", "ok"},
            {"problem", report.problem},
            {"optimizer", report.optimizer},
            {"schedule_digest", report.schedule_digest},
            {"seed", report.seed},
            {"steps", report.steps},
            {"scale", report.scale},
            {"final_loss", report.final_loss}};
  if (!schedule.empty()) j["schedule"] = std::string(schedule);
  if (report.final_error_rate) j["final_error_rate"] = *report.final_error_rate;
  if (report.final_suboptimality) j["final_suboptimality"] = *report.final_suboptimality;
  if (report.regret_vs_u) j["regret_vs_u"] = *report.regret_vs_u;
  return j.dump();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace lrsched::io
