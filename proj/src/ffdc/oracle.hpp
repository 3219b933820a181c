#pragma once

// Exact history probabilities from solved value functions, and brute-force
// checks of the sufficiency and log-odds identities.

#include "ffdc/dp_solver.hpp"
#include "ffdc/stats_catalog.hpp"

#include <string>
#include <vector>

namespace ffdc {

/// log p*_1(l_1, d_1) + sum_t log ccp(y_t | x_t, z_t, e_t). Without the
/// initial factor when include_initial is false.
double history_log_probability(const ConsumerSolution& sol, const ChoiceHistory& hist,
                               const PriceView& prices, bool include_initial = true);
double history_probability(const ConsumerSolution& sol, const ChoiceHistory& hist,
                           const PriceView& prices);

/// log P(A) - log P(B); the initial factor cancels and is never evaluated.
double log_odds(const ConsumerSolution& sol, const ChoiceHistory& a, const ChoiceHistory& b,
                const PriceView& prices);

/// Log-odds of A_{j,n} = (j, 0_{n-1}, j, 0_{n+1}) against B_{j,n} = (j, 0_n, j, 0_n)
/// from (j, 1), prices held at (z, e) throughout. Empty e: first support point.
double duration_log_odds(const ConsumerSolution& sol, int product, int n, int z = 0,
                         std::span<const double> e = {});

/// -beta_dep(j) [min(n+1, d*) - min(n, d*)] + v(j, n+2, z) - v(j, n+1, z).
double duration_log_odds_from_values(const ConsumerSolution& sol, int product, int n, int z = 0);

DurationCapReport detect_duration_cap(const ConsumerSolution& sol, int product, int max_n,
                                      double tol = 1e-9);

struct SufficiencyReport {
  long histories = 0;
  int groups = 0;           // distinct statistic vectors
  int compared_groups = 0;  // groups with at least two histories
  double max_type_gap = 0.0;     // |P1(y|s) - P2(y|s)|
  double max_formula_gap = 0.0;  // |P(y|s) - exp(c'theta) / sum exp(c'theta)|
  double tol = 0.0;
  std::vector<std::string> violations;

  bool passed() const { return violations.empty(); }
};

/// Enumerates all (J+1)^T histories from `initial` on the shared price path,
/// groups them by s and compares conditional probabilities across the two
/// solved types and against the closed form in theta. Both types must share
/// primitives, price process and income.
SufficiencyReport sufficiency_check(const ConsumerSolution& first, const ConsumerSolution& second,
                                    const StructuralParams& theta, EndogenousState initial,
                                    const PriceView& prices, double tol = 1e-10,
                                    long max_enumeration = 1000000);

}  // namespace ffdc
