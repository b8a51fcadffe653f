#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "tribrid/decision.hpp"

using namespace tribrid;

namespace {
Signals make_signals(double lpos, double lneg, double dp, double dnp, bool neg = true) {
  Signals s;
  s.lpos = lpos;
  s.lneg = lneg;
  s.dist_p = dp;
  s.dist_np = dnp;
  s.has_negation = neg;
  return s;
}
}  // namespace

TEST_CASE("stance codes") {
  CHECK(stance_code(Stance::Support) == "S");
  CHECK(stance_code(Stance::Oppose) == "O");
  CHECK(stance_code(Stance::Abstain) == "A");
}

TEST_CASE("class_log branches") {
  auto s = make_signals(2.0, -1.0, 0, 0);
  auto d = class_log(s, 1.0);
  CHECK(d.value == Stance::Support);
  CHECK(d.confidence == doctest::Approx(3.0));

  d = class_log(make_signals(-1.0, 2.0, 0, 0), 1.0);
  CHECK(d.value == Stance::Oppose);

  d = class_log(make_signals(0.4, 0.0, 0, 0), 1.0);
  CHECK(d.value == Stance::Abstain);
  CHECK(d.confidence == doctest::Approx(0.4));

  // gap exactly at tau clears it
  d = class_log(make_signals(1.0, 0.0, 0, 0), 1.0);
  CHECK(d.value == Stance::Support);
}

TEST_CASE("class_log tie goes to support") {
  auto d = class_log(make_signals(0.7, 0.7, 0, 0), 0.0);
  CHECK(d.value == Stance::Support);
  CHECK(d.confidence == 0.0);
}

TEST_CASE("class_dist branches") {
  auto d = class_dist(make_signals(0, 0, 1.0, 3.0), 1.0);
  CHECK(d.value == Stance::Support);
  CHECK(d.confidence == doctest::Approx(2.0));

  d = class_dist(make_signals(0, 0, 3.0, 1.0), 1.0);
  CHECK(d.value == Stance::Oppose);

  d = class_dist(make_signals(0, 0, 1.0, 1.5), 1.0);
  CHECK(d.value == Stance::Abstain);
  CHECK_FALSE(d.no_negation);
}

TEST_CASE("class_dist tie goes to oppose") {
  auto d = class_dist(make_signals(0, 0, 2.0, 2.0), 0.0);
  CHECK(d.value == Stance::Oppose);
}

TEST_CASE("class_dist abstains without a negation and marks it") {
  auto d = class_dist(make_signals(5, -5, 0.1, 9.0, /*neg=*/false), 0.0);
  CHECK(d.value == Stance::Abstain);
  CHECK(d.no_negation);
}

TEST_CASE("abstention is monotone in tau") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 200; ++rep) {
    auto s = make_signals(u(rng), u(rng), std::fabs(u(rng)), std::fabs(u(rng)));
    double t1 = std::fabs(u(rng)), t2 = t1 + std::fabs(u(rng));
    // once a procedure abstains it stays abstaining at any higher tau,
    // and a non-abstaining decision never changes class as tau falls
    for (auto proc : {&class_log, &class_dist}) {
      auto lo = proc(s, t1), hi = proc(s, t2);
      if (lo.value == Stance::Abstain) CHECK(hi.value == Stance::Abstain);
      if (hi.value != Stance::Abstain) CHECK(lo.value == hi.value);
    }
  }
}

TEST_CASE("decisions at tau zero never abstain when signals exist") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 100; ++rep) {
    auto s = make_signals(u(rng), u(rng), std::fabs(u(rng)), std::fabs(u(rng)));
    CHECK(class_log(s, 0).value != Stance::Abstain);
    CHECK(class_dist(s, 0).value != Stance::Abstain);
  }
}

TEST_CASE("signals_agree") {
  CHECK(signals_agree(make_signals(2, 0, 1.0, 3.0)) == Stance::Support);
  CHECK(signals_agree(make_signals(0, 2, 3.0, 1.0)) == Stance::Oppose);
  // mixed directions
  CHECK_FALSE(signals_agree(make_signals(2, 0, 3.0, 1.0)).has_value());
  // ties are not agreement
  CHECK_FALSE(signals_agree(make_signals(1, 1, 1.0, 3.0)).has_value());
  CHECK_FALSE(signals_agree(make_signals(2, 0, 2.0, 2.0)).has_value());
  // no negation, no distance signal
  CHECK_FALSE(signals_agree(make_signals(2, 0, 1.0, 3.0, false)).has_value());
}

TEST_CASE("signals_agree is consistent with both tau-zero procedures") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 300; ++rep) {
    auto s = make_signals(u(rng), u(rng), std::fabs(u(rng)), std::fabs(u(rng)));
    auto agreed = signals_agree(s);
    if (agreed) {
      CHECK(class_log(s, 0).value == *agreed);
      CHECK(class_dist(s, 0).value == *agreed);
    }
  }
}

TEST_CASE("calibrate_tau worked example") {
  // half the gaps below tau: the first value with >= 50% of mass under it is 3
  CHECK(calibrate_tau({1, 2, 3, 4}, 0.5) == 3.0);
  CHECK(calibrate_tau({1, 2, 3, 4}, 0.25) == 2.0);
  CHECK(calibrate_tau({1, 2, 3, 4}, 0.0) == 0.0);
}

TEST_CASE("calibrate_tau keeps ties and handles extremes") {
  // asking for 50% with mass tied at 2: tau=2 keeps the ties (gap >= tau)
  CHECK(calibrate_tau({1, 2, 2, 4}, 0.5) == 4.0);
  CHECK(calibrate_tau({1, 2, 2, 4}, 0.25) == 2.0);
  // discarding everything needs tau above the max
  double t = calibrate_tau({1, 2, 3, 4}, 1.0);
  CHECK(t > 4.0);
  CHECK(calibrate_tau({5, 5, 5}, 0.9) > 5.0);
}

TEST_CASE("calibrate_tau achieves at least the requested discard fraction") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 5);
  std::uniform_real_distribution<double> xf(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> gaps;
    for (int i = 0; i < 40; ++i) gaps.push_back(u(rng));
    double x = xf(rng);
    double tau = calibrate_tau(gaps, x);
    std::size_t below = 0;
    for (double g : gaps)
      if (g < tau) ++below;
    CHECK(static_cast<double>(below) / gaps.size() >= x);
  }
}

TEST_CASE("calibrate_tau input validation") {
  std::vector<double> empty;
  CHECK_THROWS_AS(calibrate_tau(empty, 0.5), std::invalid_argument);
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(calibrate_tau(one, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_tau(one, 1.5), std::invalid_argument);
}
