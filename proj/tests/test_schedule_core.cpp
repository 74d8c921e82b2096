#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lrsched/errors.hpp"
#include "lrsched/schedule_core.hpp"
#include "oracles.hpp"

using namespace lrsched;

namespace {

std::vector<double> values_of(const Schedule& s) { return {s.values().begin(), s.values().end()}; }

}  // namespace

TEST_CASE("weight sequence invariants") {
  const WeightSequence w({1.0, 2.0, 3.0});
  CHECK(w.size() == 3);
  CHECK(w.total() == 6.0);
  CHECK(w.suffix(1) == 5.0);
  CHECK(w.suffix(2) == 3.0);
  CHECK(w.suffix(3) == 0.0);
  CHECK_THROWS_AS(WeightSequence({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(WeightSequence({1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(WeightSequence(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(WeightSequence({NAN}), DomainError);
}

TEST_CASE("schedule rejects negative values and normalizes") {
  CHECK_THROWS_AS(Schedule({1.0, -0.5}), DomainError);
  CHECK_THROWS_AS(Schedule({}), DomainError);
  const Schedule s({2.0, 1.0, 0.0});
  CHECK_FALSE(s.is_normalized());
  CHECK(values_of(s.normalized()) == std::vector<double>{1.0, 0.5, 0.0});
  CHECK_THROWS_AS(Schedule({0.0, 0.0}).normalized(), DegenerateError);
}

TEST_CASE("uniform weights give linear decay") {
  const Schedule eta = weights_to_schedule(WeightSequence::uniform(4), false);
  CHECK(values_of(eta) == std::vector<double>{0.75, 0.5, 0.25, 0.0});
  const Schedule normalized = weights_to_schedule(WeightSequence::uniform(4), true);
  CHECK(values_of(normalized) == std::vector<double>{1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0});
}

TEST_CASE("single weight has an empty suffix") {
  CHECK(values_of(weights_to_schedule(WeightSequence({5.0}), false)) == std::vector<double>{0.0});
  CHECK_THROWS_AS(weights_to_schedule(WeightSequence({5.0}), true), DegenerateError);
}

TEST_CASE("weights [1,2,3] match direct summation") {
  const Schedule eta = weights_to_schedule(WeightSequence({1.0, 2.0, 3.0}), false);
  CHECK(eta[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(eta[1] == 1.0);
  CHECK(eta[2] == 0.0);
}

TEST_CASE("weights_to_schedule agrees with direct summation on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t T = 1 + rng() % 300;
    std::vector<double> w(T);
    for (double& x : w) x = u(rng);
    const Schedule eta = weights_to_schedule(WeightSequence(w), false);
    const auto ref = oracle::schedule_direct(w);
    for (std::size_t t = 0; t < T; ++t) {
      CHECK(std::fabs(eta[t] - static_cast<double>(ref[t])) <= 1e-12 * (1.0 + std::fabs(static_cast<double>(ref[t]))));
    }
  }
}

TEST_CASE("scale equivariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  std::vector<double> w(57);
  for (double& x : w) x = u(rng);
  std::vector<double> w8 = w;
  for (double& x : w8) x *= 8.0;
  const Schedule a = weights_to_schedule(WeightSequence(w), true);
  const Schedule b = weights_to_schedule(WeightSequence(w8), true);
  CHECK(a == b);
  std::vector<double> w3 = w;
  for (double& x : w3) x *= 3.0;
  const Schedule c = weights_to_schedule(WeightSequence(w), false);
  const Schedule d = weights_to_schedule(WeightSequence(w3), false);
  for (std::size_t t = 0; t < w.size(); ++t) CHECK(d[t] == doctest::Approx(3.0 * c[t]).epsilon(4e-16));
}

TEST_CASE("representation: two-step example") {
  const std::vector<double> eta{1.0};
  const Representation rep = schedule_to_weights(eta);
  REQUIRE(rep.weights.size() == 2);
  // Smaller root of w (16 - w) = 16.
  CHECK(rep.weights[0] == doctest::Approx((16.0 - std::sqrt(192.0)) / 2.0).epsilon(1e-14));
  CHECK(rep.weights[1] == doctest::Approx(16.0 - (16.0 - std::sqrt(192.0)) / 2.0).epsilon(1e-14));
  const double w1 = rep.weights[0], w2 = rep.weights[1];
  CHECK(w1 * w2 / (w1 + w2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("representation roundtrip: linear and constant") {
  std::vector<double> linear(9);
  for (std::size_t t = 0; t < 9; ++t) linear[t] = 1.0 - static_cast<double>(t) / 9.0;
  for (const auto& eta : {linear, std::vector<double>(12, 0.37)}) {
    const Representation rep = schedule_to_weights(eta);
    const auto back = oracle::max_normalized(oracle::schedule_direct(rep.weights));
    const double top = *std::max_element(eta.begin(), eta.end());
    for (std::size_t t = 0; t < eta.size(); ++t) {
      CHECK(oracle::relative_error(back[t], eta[t] / top) < 1e-6);
    }
    CHECK(rep.max_relative_residual < 1e-20);
  }
}

TEST_CASE("representation reproduces the unnormalized schedule") {
  const std::vector<double> eta{0.5, 0.25, 0.125};
  const Representation rep = schedule_to_weights(eta);
  const auto back = oracle::schedule_direct(rep.weights);
  for (std::size_t t = 0; t < eta.size(); ++t) CHECK(oracle::relative_error(back[t], eta[t]) < 1e-9);
  CHECK(static_cast<double>(back[3]) == 0.0);
}

TEST_CASE("representation suffixes and zeros") {
  const std::vector<double> eta{0.2, 0.0, 1.0, 0.4};
  const Representation rep = schedule_to_weights(eta);
  for (double w : rep.weights) CHECK(w >= 0.0);
  for (std::size_t t = 0; t < rep.weights.size(); ++t) {
    const long double s = oracle::suffix_sum(rep.weights, t);
    CHECK(oracle::relative_error(s, rep.suffix[t]) < 1e-12);
  }
  const auto back = oracle::schedule_direct(rep.weights);
  CHECK(std::fabs(static_cast<double>(back[1])) < 1e-12);
}

TEST_CASE("representation errors") {
  CHECK_THROWS_AS(schedule_to_weights(std::vector<double>{0.5, -0.1}), DomainError);
  CHECK_THROWS_AS(schedule_to_weights(std::vector<double>{}), DomainError);
  try {
    schedule_to_weights(std::vector<double>{1.0, 1.0}, 64);
    FAIL("expected an error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("insufficient precision for horizon") != std::string::npos);
  }
  CHECK_NOTHROW(schedule_to_weights(std::vector<double>{1.0, 1.0}, 4 * 3 + 64));
}

TEST_CASE("schedule zoo values") {
  const Schedule linear = make_schedule(ScheduleKind::linear, 4);
  CHECK(values_of(linear) == std::vector<double>{0.75, 0.5, 0.25, 0.0});
  CHECK(make_schedule(ScheduleKind::linear, 1000) == weights_to_schedule(WeightSequence::uniform(1000), false));

  for (std::size_t T : {1u, 7u, 100u, 1000u}) {
    ScheduleParams p;
    p.power = 1.0;
    CHECK(make_schedule(ScheduleKind::poly, T, p) == make_schedule(ScheduleKind::linear, T));
  }

  const Schedule step = make_schedule(ScheduleKind::stepwise, 100);
  CHECK(step[49] == doctest::Approx(0.1));
  CHECK(step[0] == 1.0);
  CHECK(step[99] == doctest::Approx(1e-3));
  int drops = 0;
  for (std::size_t t = 1; t < 100; ++t) {
    CHECK(step[t] <= step[t - 1]);
    if (step[t] < step[t - 1]) ++drops;
  }
  CHECK(drops == 3);

  const Schedule cosine = make_schedule(ScheduleKind::cosine, 50);
  CHECK(cosine[0] == 1.0);
  CHECK(cosine[49] == doctest::Approx(0.5 * (1.0 + std::cos(std::numbers::pi * 49.0 / 50.0))));
  for (std::size_t t = 1; t < 50; ++t) CHECK(cosine[t] <= cosine[t - 1]);
  CHECK(make_schedule(ScheduleKind::cosine, 2)[1] == doctest::Approx(0.5).epsilon(1e-15));

  ScheduleParams offset;
  offset.offset = 4000.0;
  const Schedule inv_t = make_schedule(ScheduleKind::inv_t, 4000, offset);
  CHECK(inv_t[0] == 1.0);
  CHECK(inv_t[3999] == doctest::Approx(4000.0 / 7999.0).epsilon(1e-15));
  const Schedule inv_sqrt = make_schedule(ScheduleKind::inv_sqrt, 10, offset);
  CHECK(inv_sqrt[9] == doctest::Approx(std::sqrt(4000.0 / 4009.0)).epsilon(1e-15));

  const Schedule constant = make_schedule(ScheduleKind::constant, 5);
  CHECK(values_of(constant) == std::vector<double>(5, 1.0));
}

TEST_CASE("schedule zoo errors") {
  ScheduleParams bad;
  bad.offset = 0.0;
  CHECK_THROWS_AS(make_schedule(ScheduleKind::inv_t, 10, bad), DomainError);
  CHECK_THROWS_AS(make_schedule(ScheduleKind::inv_sqrt, 10, bad), DomainError);
  bad = {};
  bad.power = -1.0;
  CHECK_THROWS_AS(make_schedule(ScheduleKind::poly, 10, bad), DomainError);
  CHECK_THROWS_AS(make_schedule(ScheduleKind::linear, 0), DomainError);
  CHECK_FALSE(parse_schedule_kind("wobble").has_value());
  for (std::string_view name : schedule_kind_names()) {
    REQUIRE(parse_schedule_kind(name).has_value());
    CHECK(to_string(*parse_schedule_kind(name)) == name);
  }
}

TEST_CASE("warmup") {
  const Schedule ramp = apply_warmup(make_schedule(ScheduleKind::constant, 100), 0.05);
  const std::vector<double> head(ramp.values().begin(), ramp.values().begin() + 7);
  CHECK(head == std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0});

  const Schedule lin = make_schedule(ScheduleKind::linear, 10);
  CHECK(apply_warmup(lin, 0.0) == lin);
  const Schedule warmed = apply_warmup(lin, 0.2);
  CHECK(warmed[0] == 0.5 * lin[0]);
  CHECK(warmed[1] == lin[1]);
  for (std::size_t t = 2; t < 10; ++t) CHECK(warmed[t] == lin[t]);
  CHECK_THROWS_AS(apply_warmup(lin, 1.0), DomainError);
  CHECK_THROWS_AS(apply_warmup(lin, -0.1), DomainError);
}

TEST_CASE("ceil_fraction tolerates representation error") {
  CHECK(ceil_fraction(0.07, 100) == 7);
  CHECK(ceil_fraction(0.3, 10) == 3);
  CHECK(ceil_fraction(0.31, 10) == 4);
  CHECK(ceil_fraction(0.0, 10) == 0);
}

TEST_CASE("fit_poly recovers its own family") {
  ScheduleParams p;
  p.power = 1.5;
  const PolyFit a = fit_poly(make_schedule(ScheduleKind::poly, 1000, p));
  CHECK(a.power == doctest::Approx(1.5).epsilon(0.05 / 1.5));
  CHECK(a.warmup_fraction == 0.0);

  p.power = 3.0;
  const PolyFit b = fit_poly(apply_warmup(make_schedule(ScheduleKind::poly, 1000, p), 0.01));
  CHECK(std::fabs(b.power - 3.0) <= 0.1);
  CHECK(std::fabs(b.warmup_fraction - 0.01) <= 0.01);

  const PolyFit c = fit_poly(make_schedule(ScheduleKind::linear, 500));
  CHECK(std::fabs(c.power - 1.0) <= 0.05);
  CHECK(c.rms_residual >= 0.0);
  CHECK(c.rms_residual < 1e-6);
}

TEST_CASE("fit_poly preconditions") {
  CHECK_THROWS_AS(fit_poly(Schedule(std::vector<double>(20, 0.0))), DomainError);
  CHECK_THROWS_AS(fit_poly(make_schedule(ScheduleKind::linear, 9)), DomainError);
}

TEST_CASE("normalized rms distance") {
  const Schedule a({2.0, 1.0, 0.0});
  const Schedule b({1.0, 0.5, 0.0});
  CHECK(normalized_rms_distance(a, b) == 0.0);
  CHECK(normalized_rms_distance(a, Schedule({1.0, 1.0, 1.0})) ==
        doctest::Approx(std::sqrt((0.0 + 0.25 + 1.0) / 3.0)));
}
