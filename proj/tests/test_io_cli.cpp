#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lrsched/bounds.hpp"
#include "lrsched/cli.hpp"
#include "lrsched/errors.hpp"
#include "lrsched/io.hpp"
#include "lrsched/svg.hpp"
#include "oracles.hpp"

using namespace lrsched;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lrsched-tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_scratch(const std::string& name, std::string_view contents) {
  const fs::path p = scratch(name);
  io::write_file(p, contents);
  return p.string();
}

}  // namespace

TEST_CASE("schedule CSV round trip is exact") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(500);
  for (double& x : v) x = u(rng) * std::pow(10.0, -static_cast<double>(rng() % 30));
  v[3] = 0.0;
  const Schedule s(v);
  CHECK(io::parse_schedule_csv(io::schedule_to_csv(s)) == s);
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("schedule CSV errors") {
  auto message = [](const char* text) {
    try {
      io::parse_schedule_csv(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("step,eta\n1,1\n").find("header") != std::string::npos);
  CHECK(message("step,multiplier\n1,1\n3,0\n") == "expected step 2 at line 3");
  CHECK(message("step,multiplier\n1,-1\n").find("at line 2") != std::string::npos);
  CHECK(message("step,multiplier\n1,nan\n").find("at line 2") != std::string::npos);
  CHECK(message("step,multiplier\n").find("no rows") != std::string::npos);
}

TEST_CASE("norm log formats") {
  const auto csv = io::parse_norm_log("step,norm\n1,0.5\n2,0.25\n\n4,1\n");
  CHECK(csv.size() == 3);
  CHECK(csv.steps()[2] == 4);
  CHECK(csv.kind() == NormKind::l2);

  const auto with_kind = io::parse_norm_log("step,norm,kind\n1,0.5,l1\n2,0.25,l1\n");
  CHECK(with_kind.kind() == NormKind::l1);
  CHECK(io::parse_norm_log("step,norm,kind\n1,0.5,l1\n", NormKind::adam_weighted).kind() == NormKind::adam_weighted);

  const auto jsonl = io::parse_norm_log("{\"step\": 1, \"norm\": 0.5}\n{\"step\": 2, \"norm\": 3, \"kind\": \"l1\"}\n");
  CHECK(jsonl.size() == 2);
  CHECK(jsonl.norms()[1] == 3.0);
  CHECK(jsonl.kind() == NormKind::l1);

  const auto log = GradientNormLog::sequential({0.1, 0.2, 1e-300}, NormKind::adam_weighted);
  const auto back = io::parse_norm_log(io::norm_log_to_csv(log));
  CHECK(std::equal(back.norms().begin(), back.norms().end(), log.norms().begin()));
  CHECK(back.kind() == NormKind::adam_weighted);
}

TEST_CASE("norm log errors name the line") {
  auto message = [](const char* text) {
    try {
      io::parse_norm_log(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("step,norm\n1,0.5\n2,nan\n") == "norm is NaN at line 3");
  CHECK(message("step,norm\n1,-0.5\n") == "negative norm at line 2");
  CHECK(message("step,norm\n2,0.5\n2,0.5\n") == "steps not strictly increasing at line 3");
  CHECK(message("{\"step\": 1, \"norm\": 1}\n{\"step\": 2, \"norm\": -1}\n") == "negative norm at line 2");
  CHECK(message("{\"step\": 1, \"norm\": NaN}\n") == "malformed JSON record at line 1");
  CHECK(message("step,value\n1,1\n").find("header") != std::string::npos);
  CHECK(message("step,norm,kind\n1,1,l3\n").find("unknown norm kind") != std::string::npos);
  CHECK(message("").find("empty") != std::string::npos);
}

TEST_CASE("json renderings") {
  const BoundReport r = anyeta_bound(Schedule({1.0, 0.5}), 1.0, 1.0);
  const auto j = nlohmann::json::parse(io::to_json(r));
  CHECK(j["total"].get<double>() == r.total);
  CHECK(j["tail_term"].get<double>() == r.tail_term);
  CHECK(j.contains("inputs_digest"));
  const auto f = nlohmann::json::parse(io::to_json(PolyFit{0.01, 3.0, 1e-4}));
  CHECK(f["power"].get<double>() == 3.0);
}

TEST_CASE("svg output is deterministic") {
  const std::vector<svg::Panel> panels{{"a & b", {{"x", {1.0, 2.0, 0.0, 4.0}, "#000"}}, true},
                                       {"flat", {{"y", {1.0, 1.0}, "#111"}}, false}};
  const std::string a = svg::render(panels);
  CHECK(a == svg::render(panels));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("a &amp; b") != std::string::npos);
  CHECK(a.find("nan") == std::string::npos);
}

TEST_CASE("cli schedule") {
  const auto r = invoke({"schedule", "--kind", "linear", "--steps", "4"});
  CHECK(r.code == 0);
  const Schedule s = io::parse_schedule_csv(r.out);
  CHECK(s == Schedule({1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0}));

  const auto cosine = io::parse_schedule_csv(invoke({"schedule", "--kind", "cosine", "--steps", "2"}).out);
  CHECK(cosine[0] == 1.0);
  CHECK(cosine[1] == doctest::Approx(0.5).epsilon(1e-15));

  for (const std::string steps : {"3", "17", "250"}) {
    CHECK(invoke({"schedule", "--kind", "poly", "--power", "1", "--steps", steps}).out ==
          invoke({"schedule", "--kind", "linear", "--steps", steps}).out);
  }

  const auto bad = invoke({"schedule", "--kind", "triangle", "--steps", "4"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("linear, cosine, stepwise, inv_t, inv_sqrt, poly, constant") != std::string::npos);

  CHECK(invoke({"schedule", "--kind", "linear"}).code == cli::kExitUsage);
  CHECK(invoke({"schedule", "--kind", "linear", "--steps", "1"}).code == cli::kExitDomain);
  CHECK(invoke({"schedule", "--kind", "inv_t", "--offset", "0", "--steps", "5"}).code == cli::kExitDomain);
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == 0);

  const std::string out = scratch("warm.csv").string();
  CHECK(invoke({"schedule", "--kind", "constant", "--steps", "100", "--warmup", "0.05", "--out", out}).code == 0);
  CHECK(io::parse_schedule_csv(io::read_file(out))[0] == 0.2);
}

TEST_CASE("cli refine") {
  const std::string constant = write_scratch("const.csv", "step,norm\n1,2\n2,2\n3,2\n4,2\n5,2\n");
  const auto r = invoke({"refine", constant});
  CHECK(r.code == 0);
  CHECK(io::parse_schedule_csv(r.out) == Schedule({1.0, 0.75, 0.5, 0.25, 0.0}));

  std::string step_log = "step,norm\n";
  const double norms[] = {1, 1, 1, 1, 2, 2, 2, 2};
  for (int i = 0; i < 8; ++i) step_log += std::to_string(i + 1) + "," + io::format_double(norms[i]) + "\n";
  const std::string step_file = write_scratch("step.csv", step_log);
  const std::string plot = scratch("refine.svg").string();
  const auto stepped = invoke({"refine", step_file, "--tau", "0.05", "--plot", plot});
  REQUIRE(stepped.code == 0);
  const Schedule s = io::parse_schedule_csv(stepped.out);
  const auto expect = oracle::max_normalized(oracle::schedule_direct(std::vector<double>{1, 1, 1, 1, .25, .25, .25, .25}));
  for (std::size_t t = 0; t < 8; ++t) CHECK(s[t] == doctest::Approx(static_cast<double>(expect[t])).epsilon(1e-15));
  const std::string svg_text = io::read_file(plot);
  CHECK(svg_text.find("<polyline") != std::string::npos);
  invoke({"refine", step_file, "--tau", "0.05", "--plot", plot});
  CHECK(io::read_file(plot) == svg_text);

  const std::string zeros = write_scratch("zeros.csv", "step,norm\n1,1\n2,0\n3,0\n4,0\n5,1\n");
  const auto degenerate = invoke({"refine", zeros, "--tau", "0.6"});
  CHECK(degenerate.code == cli::kExitDomain);
  CHECK(degenerate.err.find("linear decay") != std::string::npos);
  const auto clamped = invoke({"refine", zeros, "--tau", "0.6", "--zero-policy", "clamp"});
  CHECK(clamped.code == 0);
  CHECK(clamped.err.find("warning") != std::string::npos);

  const std::string broken = write_scratch("broken.csv", "step,norm\n1,1\n2,abc\n");
  const auto parse = invoke({"refine", broken});
  CHECK(parse.code == cli::kExitUsage);
  CHECK(parse.err.find("line 3") != std::string::npos);
  CHECK(invoke({"refine", scratch("does-not-exist.csv").string()}).code == cli::kExitUsage);
  CHECK(invoke({"refine", constant, "--weighting", "inv_cube"}).code == cli::kExitUsage);
}

TEST_CASE("cli bound") {
  const std::size_t T = 100;
  const std::string eta = write_scratch("offset_linear.csv", io::schedule_to_csv(offset_linear_schedule(T, 1.0, 1.0)));
  const auto r = invoke({"bound", "--eta-file", eta, "--G", "1", "--D", "1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["total"].get<double>() == doctest::Approx(linear_decay_exact_constant(T) / 10.0).epsilon(1e-12));

  const std::string zero_norms = write_scratch("zero_norms.csv", "step,norm\n1,0\n2,0\n3,0\n");
  const std::string small = write_scratch("small.csv", "step,multiplier\n1,0.5\n2,0.25\n3,0.25\n");
  const auto z = invoke({"bound", "--eta-file", small, "--norms-file", zero_norms, "--D", "2"});
  REQUIRE(z.code == 0);
  CHECK(nlohmann::json::parse(z.out)["total"].get<double>() == doctest::Approx(4.0 / 2.0).epsilon(1e-15));

  CHECK(invoke({"bound", "--eta-file", small}).code == cli::kExitUsage);
  CHECK(invoke({"bound", "--eta-file", small, "--G", "1", "--norms-file", zero_norms}).code == cli::kExitUsage);
  const std::string hole = write_scratch("hole.csv", "step,multiplier\n1,1\n2,0\n3,0\n");
  const auto h = invoke({"bound", "--eta-file", hole, "--G", "1"});
  CHECK(h.code == cli::kExitDomain);
  CHECK(h.err.find("zero suffix sum") != std::string::npos);
}

TEST_CASE("cli fit-poly") {
  const std::string f = scratch("lin.csv").string();
  REQUIRE(invoke({"schedule", "--kind", "linear", "--steps", "400", "--out", f}).code == 0);
  const auto r = invoke({"fit-poly", f});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["power"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("cli simulate") {
  const std::string out = scratch("abs.csv").string();
  const auto r = invoke({"simulate", "--problem", "abs", "--schedules", "linear", "--seeds", "1", "--steps", "64",
                         "--out", out});
  REQUIRE(r.code == 0);
  const std::string table = io::read_file(out);
  std::istringstream lines(table);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::vector<std::string> cols;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  REQUIRE(cols.size() == 13);
  CHECK(std::stod(cols[10]) <= std::stod(cols[12]));

  const std::string log_a = scratch("run_a.jsonl").string();
  const std::string log_b = scratch("run_b.jsonl").string();
  const std::string norms = scratch("norms.csv").string();
  std::vector<std::string> args{"simulate", "--problem", "synthetic", "--samples", "128", "--schedules",
                                "constant,linear,cosine,refined", "--seeds", "2", "--steps", "300"};
  auto a_args = args;
  a_args.insert(a_args.end(), {"--log", log_a, "--norm-log", norms});
  auto b_args = args;
  b_args.insert(b_args.end(), {"--log", log_b});
  const auto a = invoke(a_args);
  const auto b = invoke(b_args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(io::read_file(log_a) == io::read_file(log_b));
  int rows = 0;
  for (char c : a.out) rows += c == '\n';
  CHECK(rows == 5);
  // The baseline norm log feeds straight back into refine.
  CHECK(invoke({"refine", norms}).code == 0);

  CHECK(invoke({"simulate", "--problem", "moon"}).code == cli::kExitUsage);
  CHECK(invoke({"simulate", "--schedules", "linear,zigzag"}).code == cli::kExitUsage);
  const auto diverged =
      invoke({"simulate", "--problem", "abs", "--G", "10", "--schedules", "constant", "--seeds", "2", "--scale",
              "1e308", "--steps", "5"});
  CHECK(diverged.code == cli::kExitDomain);
  CHECK(diverged.err.find("at step 1") != std::string::npos);
}
