#pragma once

// Text formats: schedule CSV, gradient-norm logs (CSV or JSON-lines), and JSON
// renderings of reports.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lrsched/bounds.hpp"
#include "lrsched/convex_lab.hpp"
#include "lrsched/refinement.hpp"
#include "lrsched/schedule_core.hpp"

namespace lrsched::io {

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

// `step,multiplier` with steps 1..T.
std::string schedule_to_csv(const Schedule& schedule);
// Throws ParseError on a bad header, a missing or out-of-order step, or a
// negative / non-finite multiplier.
Schedule parse_schedule_csv(std::string_view text);

// `step,norm,kind`.
std::string norm_log_to_csv(const GradientNormLog& log);

// CSV with header `step,norm` (optional third column `kind`) or JSON-lines
// records {"step": 1, "norm": 0.5, "kind": "l2"}; the format is detected from
// the first nonblank line. `kind` overrides whatever the file declares; with
// neither, l2 is assumed. Throws ParseError with the offending line.
GradientNormLog parse_norm_log(std::string_view text, std::optional<NormKind> kind = std::nullopt);

std::string to_json(const BoundReport& report);
std::string to_json(const PolyFit& fit);
// One line, no trailing newline. Logs and points are omitted; a nonempty
// `schedule` name is added as a field.
std::string to_json_line(const RunReport& report, std::string_view schedule = {});

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lrsched::io
