#include "support/fixtures.hpp"

#include "ffdc/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace ffdc;

TEST_CASE("draw_choice inverts the cdf") {
  const double degenerate[] = {0.0, 0.0, 1.0};
  CHECK(draw_choice(degenerate, 0.0) == 2);
  CHECK(draw_choice(degenerate, 0.999) == 2);
  const double row[] = {0.0, 0.3, 0.7};
  CHECK(draw_choice(row, 0.0) == 1);
  CHECK(draw_choice(row, 0.29) == 1);
  CHECK(draw_choice(row, 0.31) == 2);
}

TEST_CASE("symmetric one-product myopic consumers buy half the time") {
  auto prim = SimulationPrimitives::zeros(1);
  auto proc = fx::hilo({{{2.0, 1.0}}}, {{1.0}}, 0.0);
  SimulationSettings s;
  s.num_consumers = 20000;
  s.num_periods = 5;
  s.seed = 3;
  const auto data = simulate_panel({fx::make_type({0.0}, 0.0, 5.0)}, prim, proc, s);
  long buys = 0, n = 0;
  for (int i = 0; i < data.num_consumers(); ++i)
    for (int y : data.choices(i)) buys += y, ++n;
  CHECK(std::abs(buys / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("same seed gives the same panel, whatever the thread count") {
  SimulationSettings s;
  s.num_consumers = 500;
  s.num_periods = 6;
  s.seed = 42;
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const std::vector<ConsumerType> pop{fx::reference_type()};
  const auto a = simulate_panel(pop, prim, proc, s);
  s.threads = 4;
  const auto b = simulate_panel(pop, prim, proc, s);
  s.seed = 43;
  const auto c = simulate_panel(pop, prim, proc, s);
  bool same = true, differs = false;
  for (int i = 0; i < a.num_consumers(); ++i) {
    for (int t = 0; t < 6; ++t) {
      same = same && a.choices(i)[t] == b.choices(i)[t] && a.prices(i).z[t] == b.prices(i).z[t];
      differs = differs || a.choices(i)[t] != c.choices(i)[t];
    }
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("shared price paths give every consumer the same prices") {
  SimulationSettings s;
  s.num_consumers = 50;
  s.num_periods = 5;
  s.price_paths = PricePathMode::shared;
  const auto data = simulate_panel({fx::reference_type()}, fx::reference_primitives(),
                                   fx::reference_process(), s);
  for (int i = 1; i < data.num_consumers(); ++i)
    for (int t = 0; t < 5; ++t) CHECK(data.prices(i).p_at(t)[0] == data.prices(0).p_at(t)[0]);
}

TEST_CASE("initial conditions follow each type's distribution") {
  auto t1 = fx::make_type({1.0, 0.0}, 0.5, 10.0, {1, 1}, 0.3);
  auto t2 = fx::make_type({0.0, 1.0}, 0.5, 10.0, {2, 2}, 0.7);
  SimulationSettings s;
  s.num_consumers = 20000;
  s.num_periods = 2;
  s.seed = 5;
  const auto data = simulate_panel({t1, t2}, fx::reference_primitives(), fx::reference_process(), s);
  long first = 0;
  for (int i = 0; i < data.num_consumers(); ++i) {
    const auto x = data.initial(i);
    CHECK(((x == EndogenousState{1, 1} && data.true_type(i) == 0) ||
           (x == EndogenousState{2, 2} && data.true_type(i) == 1)));
    first += data.true_type(i) == 0;
  }
  const double n = data.num_consumers();
  CHECK(std::abs(first / n - 0.3) < 4 * std::sqrt(0.21 / n));
}

TEST_CASE("choice frequencies agree with the ccp table") {
  // Goodness of fit at the initial cell, pooled over the first-period (z, e) draws.
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const ConsumerSolution sol(prim, fx::reference_type(), proc);
  SimulationSettings s;
  s.num_consumers = 40000;
  s.num_periods = 1;
  s.seed = 9;
  const auto data = simulate_panel({sol}, {1.0}, s);
  std::vector<double> expected(3, 0.0), observed(3, 0.0);
  for (int i = 0; i < data.num_consumers(); ++i) {
    const auto pv = data.prices(i);
    const auto ccp = sol.choice_probabilities(data.initial(i), pv.z[0], pv.e_at(0));
    for (int y = 0; y < 3; ++y) expected[y] += ccp[y];
    observed[data.choices(i)[0]] += 1;
  }
  double chi2 = 0.0;
  for (int y = 0; y < 3; ++y) chi2 += std::pow(observed[y] - expected[y], 2) / expected[y];
  CHECK(chi2 < 13.8);  // chi-square(2) 0.999 quantile
}
