#include "support/fixtures.hpp"

#include "ffdc/errors.hpp"
#include "ffdc/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace ffdc;

TEST_CASE("transition: no purchase ages the stock, purchase resets it") {
  CHECK(transition(0, {2, 3}, 2, 5) == EndogenousState{2, 4});
  CHECK(transition(1, {2, 3}, 2, 5) == EndogenousState{1, 1});
  CHECK(transition(2, {2, 3}, 2, 5) == EndogenousState{2, 1});
  CHECK(transition(0, {1, 5}, 2, 5) == EndogenousState{1, 5});
  CHECK_THROWS_AS(transition(3, {1, 1}, 2, 5), ContractViolation);
  CHECK_THROWS_AS(transition(-1, {1, 1}, 2, 5), ContractViolation);
  CHECK_THROWS_AS(transition(0, {0, 1}, 2, 5), ContractViolation);
  CHECK_THROWS_AS(transition(0, {1, 6}, 2, 5), ContractViolation);
}

TEST_CASE("h_eval") {
  CHECK(h_eval(HForm::linear, 10.0) == 10.0);
  CHECK(h_eval(HForm::logarithmic, 1.0) == 0.0);
  CHECK(h_eval(HForm::logarithmic, std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(h_eval(HForm::logarithmic, 0.0), DomainError);
  CHECK_THROWS_AS(h_eval(HForm::logarithmic, -1.0), DomainError);
  CHECK(parse_h_form("log") == HForm::logarithmic);
  CHECK(parse_h_form(to_string(HForm::linear)) == HForm::linear);
  CHECK_THROWS_AS(parse_h_form("cubic"), ValidationError);
}

TEST_CASE("flow_utility") {
  auto prim = SimulationPrimitives::zeros(2);
  prim.beta_dep = {0.0, 0.2};
  prim.d_star = {5, 5};
  auto cons = fx::make_type({0.0, 1.0}, 0.9, 10.0);
  const double p[] = {2.0, 3.0};

  // no purchase: alpha(2) - beta_dep(2) * min(3, 5)
  CHECK(flow_utility(prim, cons, 0, {2, 3}, p) == doctest::Approx(0.4).epsilon(1e-15));

  prim.gamma = 1.0;
  prim.beta_dep = {0.0, 0.0};
  prim.beta_sc(2, 1) = 0.5;
  // purchase of 1 from 2: alpha(1) + (10 - 2) - 0.5
  CHECK(flow_utility(prim, cons, 1, {2, 1}, p) == doctest::Approx(7.5).epsilon(1e-15));

  prim.beta_dep = {0.3, 0.3};
  prim.d_star = {2, 2};
  // duration beyond the cap stops depreciating
  CHECK(flow_utility(prim, cons, 0, {1, 2}, p) == flow_utility(prim, cons, 0, {1, 5}, p));

  prim.h_form = HForm::logarithmic;
  cons.mu = 2.0;
  CHECK_THROWS_AS(flow_utility(prim, cons, 1, {1, 1}, p), DomainError);
}

TEST_CASE("theta_projection") {
  auto prim = SimulationPrimitives::zeros(2);
  prim.beta_sc(1, 2) = 0.3;
  prim.beta_sc(2, 1) = 0.5;
  CHECK(theta_projection(prim).beta_sc_tilde(1, 2) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(theta_projection(prim).beta_sc_tilde(2, 1) == doctest::Approx(0.8).epsilon(1e-15));

  CHECK(theta_projection(SimulationPrimitives::zeros(3)).values().isZero());

  auto sym = SimulationPrimitives::zeros(3);
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= 3; ++j)
      if (k != j) sym.beta_sc(k, j) = 0.4;
  const auto th = theta_projection(sym);
  CHECK(th.beta_sc_tilde(1, 3) == doctest::Approx(0.8));
  CHECK(th.beta_sc_tilde(2, 3) == doctest::Approx(0.8));
}

TEST_CASE("theta layout") {
  const ThetaLayout layout(3);
  CHECK(layout.size() == 1 + 3 + 3);
  CHECK(layout.name(0) == "gamma");
  CHECK(layout.pair_index(1, 2) == 1);
  CHECK(layout.pair_index(2, 1) == 1);
  CHECK(layout.pair_index(1, 3) == 2);
  CHECK(layout.pair_index(2, 3) == 3);
  CHECK(layout.dep_index(1) == 4);
  CHECK(layout.name(3) == "beta_sc_tilde(2,3)");
  CHECK(layout.name(6) == "beta_dep(3)");
  CHECK_THROWS_AS(layout.pair_index(2, 2), ContractViolation);
  CHECK(ThetaLayout(1).size() == 2);
}

TEST_CASE("validation names the offending field") {
  auto prim = fx::reference_primitives();
  CHECK_NOTHROW(prim.validate());
  prim.d_star = {3, 0};
  CHECK_THROWS_WITH_AS(prim.validate(), doctest::Contains("d_star"), ValidationError);

  prim = fx::reference_primitives();
  prim.beta_dep = {0.1};
  CHECK_THROWS_AS(prim.validate(), ValidationError);

  auto t = fx::reference_type();
  t.delta = 1.0;
  CHECK_THROWS_WITH_AS(t.validate(2, 3), doctest::Contains("delta"), ValidationError);

  auto a = fx::make_type({0, 0}, 0.5, 1.0, {1, 1}, 0.4);
  auto b = fx::make_type({0, 0}, 0.5, 1.0, {1, 1}, 0.4);
  CHECK_THROWS_AS(validate_population({a, b}, 2, 3), ValidationError);
  b.weight = 0.6;
  CHECK_NOTHROW(validate_population({a, b}, 2, 3));

  auto c = fx::reference_type();
  c.initial_dist = {{{1, 4}, 1.0}};
  CHECK_THROWS_AS(c.validate(2, 3), ValidationError);
}
