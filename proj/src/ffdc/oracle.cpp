#include "ffdc/oracle.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace ffdc {

double history_log_probability(const ConsumerSolution& sol, const ChoiceHistory& hist,
                               const PriceView& prices, bool include_initial) {
  const auto& prim = sol.primitives();
  if (prices.periods() < hist.length())
    throw ContractViolation("history_probability: price path shorter than the history");
  const int D = prim.duration_cap();
  double lp = 0.0;
  if (include_initial) {
    const double p1 = sol.consumer().probability_of_initial(hist.initial);
    lp += p1 > 0.0 ? std::log(p1) : -std::numeric_limits<double>::infinity();
  }
  EndogenousState x{hist.initial.last_brand, std::min(hist.initial.duration, D)};
  for (int t = 0; t < hist.length(); ++t) {
    lp += sol.log_ccp(hist.choices[t], x, prices.z[t], prices.e_at(t));
    x = transition(hist.choices[t], x, prim.num_products, D);
  }
  return lp;
}

double history_probability(const ConsumerSolution& sol, const ChoiceHistory& hist,
                           const PriceView& prices) {
  return std::exp(history_log_probability(sol, hist, prices, true));
}

double log_odds(const ConsumerSolution& sol, const ChoiceHistory& a, const ChoiceHistory& b,
                const PriceView& prices) {
  if (!(a.initial == b.initial)) throw ContractViolation("log_odds: histories must share the initial state");
  return history_log_probability(sol, a, prices, false) -
         history_log_probability(sol, b, prices, false);
}

namespace {

std::vector<double> default_e(const ConsumerSolution& sol, int z, std::span<const double> e) {
  if (!e.empty()) return {e.begin(), e.end()};
  return sol.process().integration_points(z).front().e;
}

}  // namespace

double duration_log_odds(const ConsumerSolution& sol, int product, int n, int z,
                         std::span<const double> e) {
  const auto& prim = sol.primitives();
  const auto spec = duration_pair(product, n, prim.d_star);
  const auto ee = default_e(sol, z, e);
  const auto path = PricePath::constant(sol.process(), z, ee, spec.length());
  return log_odds(sol, spec.a, spec.b, path.view());
}

double duration_log_odds_from_values(const ConsumerSolution& sol, int product, int n, int z) {
  const auto& prim = sol.primitives();
  const int D = prim.duration_cap();
  const int cap = prim.cap(product);
  const auto& vf = sol.values();
  const double dep = -prim.dep(product) * (std::min(n + 1, cap) - std::min(n, cap));
  return dep + vf.v(product, std::min(n + 2, D), z) - vf.v(product, std::min(n + 1, D), z);
}

DurationCapReport detect_duration_cap(const ConsumerSolution& sol, int product, int max_n,
                                      double tol) {
  auto provider = [&](int n) -> std::optional<DurationGap> {
    DurationGap g;
    g.gap = duration_log_odds(sol, product, n);
    g.tol = tol;
    return g;
  };
  return detect_duration_cap(product, max_n, provider);
}

namespace {

double lse(const std::vector<double>& x) { return log_sum_exp(x); }

}  // namespace

SufficiencyReport sufficiency_check(const ConsumerSolution& first, const ConsumerSolution& second,
                                    const StructuralParams& theta, EndogenousState initial,
                                    const PriceView& prices, double tol, long max_enumeration) {
  const auto& prim = first.primitives();
  const int J = prim.num_products;
  const int T = prices.periods();
  if (second.primitives().num_products != J || theta.num_products() != J)
    throw ContractViolation("sufficiency_check: product counts differ");
  if (first.consumer().mu != second.consumer().mu)
    throw ContractViolation("sufficiency_check: both types must share income");
  double count = 1.0;
  for (int t = 0; t < T; ++t) count *= (J + 1);
  if (count > static_cast<double>(max_enumeration)) {
    std::ostringstream msg;
    msg << "sufficiency_check: (J+1)^T = " << count << " exceeds the enumeration limit "
        << max_enumeration;
    throw ValidationError(msg.str());
  }

  struct Entry {
    std::vector<int> choices;
    double lp1, lp2, index;
  };
  std::map<std::map<CellKey, std::int64_t>, std::vector<Entry>> groups;
  const double mu = first.consumer().mu;
  ChoiceHistory h{initial, std::vector<int>(T, 0)};
  SufficiencyReport rep;
  rep.tol = tol;
  for (;;) {
    auto stats = build_statistics(h, prices, mu, prim.h_form, prim.d_star);
    groups[std::move(stats.s)].push_back({h.choices,
                                          history_log_probability(first, h, prices, false),
                                          history_log_probability(second, h, prices, false),
                                          stats.c.dot(theta.values())});
    ++rep.histories;
    int t = T - 1;
    while (t >= 0 && h.choices[t] == J) h.choices[t--] = 0;
    if (t < 0) break;
    ++h.choices[t];
  }

  rep.groups = static_cast<int>(groups.size());
  for (const auto& [s, members] : groups) {
    if (members.size() < 2) continue;
    ++rep.compared_groups;
    std::vector<double> l1, l2, li;
    for (const auto& m : members) {
      l1.push_back(m.lp1);
      l2.push_back(m.lp2);
      li.push_back(m.index);
    }
    const double n1 = lse(l1), n2 = lse(l2), ni = lse(li);
    for (size_t k = 0; k < members.size(); ++k) {
      const double p1 = std::exp(l1[k] - n1), p2 = std::exp(l2[k] - n2), pf = std::exp(li[k] - ni);
      const double type_gap = std::abs(p1 - p2);
      const double formula_gap = std::max(std::abs(p1 - pf), std::abs(p2 - pf));
      rep.max_type_gap = std::max(rep.max_type_gap, type_gap);
      rep.max_formula_gap = std::max(rep.max_formula_gap, formula_gap);
      if ((type_gap > tol || formula_gap > tol) && rep.violations.size() < 20) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "history (";
        for (size_t t = 0; t < members[k].choices.size(); ++t)
          msg << (t ? "," : "") << members[k].choices[t];
        msg << "): P1(y|s)=" << p1 << " P2(y|s)=" << p2 << " closed form=" << pf;
        rep.violations.push_back(msg.str());
      }
    }
  }
  return rep;
}

}  // namespace ffdc
