#include "support/fixtures.hpp"

#include "ffdc/dp_solver.hpp"
#include "ffdc/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ffdc;

namespace {

// Plain value iteration written from the model equations, sharing nothing with
// the solver except the primitives. Returns v[l][d][z].
using Table = std::vector<std::vector<std::vector<double>>>;

Table reference_values(const SimulationPrimitives& prim, const ConsumerType& cons,
                       const PriceProcess& proc, int sweeps) {
  const int J = prim.num_products, D = prim.duration_cap(), Z = proc.num_z();
  Table v(J + 1, std::vector<std::vector<double>>(D + 1, std::vector<double>(Z, 0.0)));
  auto h = [&](double c) { return prim.h_form == HForm::linear ? c : std::log(c); };
  for (int it = 0; it < sweeps; ++it) {
    Table next = v;
    for (int l = 1; l <= J; ++l)
      for (int d = 1; d <= D; ++d)
        for (int z = 0; z < Z; ++z) {
          double acc = 0.0;
          for (int zn = 0; zn < Z; ++zn) {
            const double f = proc.z_transition(z, zn);
            if (f == 0.0) continue;
            for (const auto& pt : proc.integration_points(zn)) {
              const auto p = proc.prices(zn, pt.e);
              std::vector<double> val;
              const int dn = std::min(d + 1, D);
              val.push_back(cons.alpha[l - 1] + prim.gamma * h(cons.mu) -
                            prim.beta_dep[l - 1] * std::min(d, prim.d_star[l - 1]) + v[l][dn][zn]);
              for (int j = 1; j <= J; ++j)
                val.push_back(cons.alpha[j - 1] + prim.gamma * h(cons.mu - p[j - 1]) -
                              prim.beta_sc(l, j) + v[j][1][zn]);
              double m = val[0];
              for (double x : val) m = std::max(m, x);
              double s = 0.0;
              for (double x : val) s += std::exp(x - m);
              acc += f * pt.prob * (m + std::log(s));
            }
          }
          next[l][d][z] = cons.delta * acc;
        }
    v = std::move(next);
  }
  return v;
}

std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(FFDC_TEST_DIR) / "golden" / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("log_sum_exp is stable") {
  const double big[] = {1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  const double small[] = {-1000.0, -1001.0};
  CHECK(std::isfinite(log_sum_exp(small)));
  const double same[] = {0.3, 0.3, 0.3};
  CHECK(log_sum_exp(same) == doctest::Approx(0.3 + std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("myopic consumers") {
  auto cons = fx::reference_type();
  cons.delta = 0.0;
  const auto prim = fx::reference_primitives();
  const auto proc = fx::reference_process();
  const auto vf = solve(prim, cons, proc);
  CHECK(vf.iterations == 1);
  for (double x : vf.v_table()) CHECK(x == 0.0);

  // choice values are flow utilities, ccps a static logit
  const auto& e = proc.integration_points(1)[2].e;
  const auto p = proc.prices(1, e);
  const EndogenousState x{2, 3};
  const auto cv = choice_values(prim, cons, proc, vf, x, 1, e);
  double denom = 0.0;
  for (int y = 0; y <= 2; ++y) {
    CHECK(cv[y] == doctest::Approx(flow_utility(prim, cons, y, x, p)).epsilon(1e-15));
    denom += std::exp(cv[y]);
  }
  const auto ccp = vf.ccp(2, 3, 1, 2);
  for (int y = 0; y <= 2; ++y) CHECK(ccp[y] == doctest::Approx(std::exp(cv[y]) / denom).epsilon(1e-14));

  // bellman_update ignores the incoming v when delta = 0
  ValueFunctions in(2, prim.duration_cap(), proc), out(2, prim.duration_cap(), proc);
  for (auto& x : in.v_table()) x = 17.0;
  bellman_update(prim, cons, proc, in, out);
  for (double x : out.v_table()) CHECK(x == 0.0);
}

TEST_CASE("equal choice values give sigma = u + log(J+1)") {
  auto prim = SimulationPrimitives::zeros(2);
  auto proc = fx::hilo({{{2.0, 1.0}, {2.0, 1.0}}}, {{1.0}}, 0.0);
  auto cons = fx::make_type({0.0, 0.0}, 0.0, 5.0);
  const auto vf = solve(prim, cons, proc);
  CHECK(vf.sigma(1, 1, 0, 0) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("symmetric single-product problem has ccp 1/2") {
  auto prim = SimulationPrimitives::zeros(1);
  auto proc = fx::hilo({{{2.0, 1.0}}}, {{1.0}}, 0.0);
  auto cons = fx::make_type({0.0}, 0.9, 5.0);
  const auto vf = solve(prim, cons, proc);
  for (int d = 1; d <= prim.duration_cap(); ++d) {
    CHECK(vf.ccp(1, d, 0, 0)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vf.ccp(1, d, 0, 0)[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("fixed point matches an independent value iteration") {
  std::mt19937_64 rng(11);
  for (auto form : {HForm::linear, HForm::logarithmic}) {
    const auto prim = fx::random_primitives(2, {2, 3}, form, rng);
    const auto cons = fx::make_type(fx::random_alpha(2, rng), 0.8, 8.0, {2, 1});
    const auto proc = fx::reference_process();
    const auto vf = solve(prim, cons, proc);
    const auto ref = reference_values(prim, cons, proc, 400);
    for (int l = 1; l <= 2; ++l)
      for (int d = 1; d <= 3; ++d)
        for (int z = 0; z < 2; ++z) CHECK(vf.v(l, d, z) == doctest::Approx(ref[l][d][z]).epsilon(1e-10));
  }
}

TEST_CASE("continuation values stop moving past the cap") {
  auto prim = fx::reference_primitives();
  prim.d_star = {1, 3};
  const auto vf = solve(prim, fx::reference_type(), fx::reference_process());
  for (int z = 0; z < 2; ++z)
    for (int d = 1; d <= 3; ++d) CHECK(vf.v(1, d, z) == vf.v(1, 1, z));
  CHECK(vf.v(2, 1, 0) != vf.v(2, 2, 0));
}

TEST_CASE("residuals contract at rate delta") {
  const auto vf = solve(fx::reference_primitives(), fx::reference_type(), fx::reference_process());
  const auto& r = vf.residual_history;
  REQUIRE(r.size() > 30);
  for (size_t i = 1; i < 30; ++i) CHECK(r[i] <= 0.95 * r[i - 1] * (1 + 1e-12));
  CHECK(vf.residual < 1e-12);
}

TEST_CASE("nonconvergence carries the last residual") {
  SolveOptions opts;
  opts.max_iter = 3;
  try {
    solve(fx::reference_primitives(), fx::reference_type(), fx::reference_process(), opts);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.iterations() == 3);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("reference fixed point is reproducible bit for bit") {
  const ConsumerSolution sol(fx::reference_primitives(), fx::reference_type(), fx::reference_process());
  std::ostringstream out;
  write_value_functions(sol.values(), out);
  const auto path = golden("reference_values.txt");
  if (std::getenv("FFDC_REGENERATE_GOLDEN")) std::ofstream(path) << out.str();
  REQUIRE(std::filesystem::exists(path));
  CHECK(out.str() == slurp(path));
}
