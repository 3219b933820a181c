#include "support/fixtures.hpp"

#include "ffdc/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace ffdc;

namespace {

ConsumerSolution reference_solution() {
  return {fx::reference_primitives(), fx::reference_type(), fx::reference_process()};
}

PricePath fixed_path() {
  const auto proc = fx::reference_process();
  PricePath path;
  path.push_back(proc, 0, std::vector<double>{0.0, 0.0});
  path.push_back(proc, 0, std::vector<double>{1.0, 0.0});
  path.push_back(proc, 1, std::vector<double>{0.0, 0.0});
  path.push_back(proc, 1, std::vector<double>{0.0, 1.0});
  return path;
}

// Repeated prices let distinct histories share a statistic.
PricePath flat_path() {
  return PricePath::constant(fx::reference_process(), 1, std::vector<double>{1.0, 0.0}, 4);
}

}  // namespace

TEST_CASE("history probabilities over all histories sum to the initial mass") {
  const auto sol = reference_solution();
  const auto path = fixed_path();
  double total = 0.0;
  for (int code = 0; code < 81; ++code) {
    ChoiceHistory h{{1, 1}, {}};
    for (int t = 0, c = code; t < 4; ++t, c /= 3) h.choices.push_back(c % 3);
    total += history_probability(sol, h, path.view());
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("one-period history is p*_1 times a ccp") {
  auto type = fx::reference_type();
  type.initial_dist = {{{1, 1}, 0.25}, {{2, 2}, 0.75}};
  const ConsumerSolution sol(fx::reference_primitives(), type, fx::reference_process());
  PricePath path;
  path.push_back(sol.process(), 1, std::vector<double>{1.0, 1.0});
  const ChoiceHistory h{{2, 2}, {1}};
  const auto ccp = sol.choice_probabilities({2, 2}, 1, path.view().e_at(0));
  CHECK(history_probability(sol, h, path.view()) == doctest::Approx(0.75 * ccp[1]).epsilon(1e-15));
}

TEST_CASE("log_odds of a history against itself is zero") {
  const auto sol = reference_solution();
  const ChoiceHistory h{{1, 2}, {0, 2, 1, 0}};
  CHECK(log_odds(sol, h, h, fixed_path().view()) == 0.0);
}

TEST_CASE("sufficiency: shifting alpha by a constant changes no conditional") {
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const ConsumerSolution a(prim, fx::make_type({0.5, 0.2}, 0.95, 10.0), proc);
  const ConsumerSolution b(prim, fx::make_type({1.5, 1.2}, 0.95, 10.0), proc);
  const auto rep = sufficiency_check(a, b, theta_projection(prim), {1, 1}, flat_path().view());
  CHECK(rep.passed());
  CHECK(rep.histories == 81);
  CHECK(rep.compared_groups > 0);
}

TEST_CASE("sufficiency: different alpha and delta, same theta") {
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const ConsumerSolution a(prim, fx::make_type({0.5, 0.2}, 0.95, 10.0), proc);
  const ConsumerSolution b(prim, fx::make_type({-1.0, 1.3}, 0.4, 10.0), proc);
  const auto rep = sufficiency_check(a, b, theta_projection(prim), {2, 1}, flat_path().view());
  CHECK(rep.passed());
  CHECK(rep.compared_groups > 0);
  CHECK(rep.max_type_gap < 1e-12);
}

TEST_CASE("sufficiency: a wrong theta is reported") {
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const ConsumerSolution a(prim, fx::make_type({0.5, 0.2}, 0.95, 10.0), proc);
  const ConsumerSolution b(prim, fx::make_type({-1.0, 1.3}, 0.95, 10.0), proc);
  auto theta = theta_projection(prim);
  theta.set_beta_sc_tilde(1, 2, theta.beta_sc_tilde(1, 2) + 0.1);
  const auto rep = sufficiency_check(a, b, theta, {1, 1}, flat_path().view());
  CHECK_FALSE(rep.passed());
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.max_type_gap < 1e-12);
  CHECK(rep.max_formula_gap > 1e-3);
}

TEST_CASE("duration log-odds follow the capped formula") {
  const auto sol = reference_solution();
  const auto& prim = sol.primitives();
  for (int j = 1; j <= 2; ++j) {
    CHECK(duration_log_odds(sol, j, 2) == doctest::Approx(-prim.dep(j)).epsilon(1e-10));
    CHECK(std::abs(duration_log_odds(sol, j, 3)) < 1e-10);
    for (int n = 1; n <= 3; ++n)
      CHECK(duration_log_odds(sol, j, n, 1) ==
            doctest::Approx(duration_log_odds_from_values(sol, j, n, 1)).epsilon(1e-10));
    const auto rep = detect_duration_cap(sol, j, 3);
    CHECK(rep.status == CapStatus::detected);
    CHECK(rep.cap == 3);
  }
}

TEST_CASE("no depreciation: nothing to detect") {
  auto prim = fx::reference_primitives();
  prim.beta_dep = {0.0, 0.0};
  const ConsumerSolution sol(prim, fx::reference_type(), fx::reference_process());
  const auto rep = detect_duration_cap(sol, 1, 3);
  CHECK(rep.status == CapStatus::none);
  for (const auto& e : rep.profile) CHECK(std::abs(e.value.gap) < 1e-12);
}

TEST_CASE("reference history probability is frozen") {
  const auto sol = reference_solution();
  const ChoiceHistory h{{1, 1}, {0, 1, 0, 2}};
  const double p = history_probability(sol, h, fixed_path().view());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a\n", p);
  const auto path = std::filesystem::path(FFDC_TEST_DIR) / "golden" / "reference_history.txt";
  if (std::getenv("FFDC_REGENERATE_GOLDEN")) std::ofstream(path) << buf;
  std::ifstream in(path);
  std::string stored;
  REQUIRE(std::getline(in, stored));
  CHECK(stored + "\n" == std::string(buf));
}
