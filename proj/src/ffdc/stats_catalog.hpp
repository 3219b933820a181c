#pragma once

// Statistic vectors of choice histories, the catalog of identifying history
// pairs with their price restrictions, and duration-cap detection.

#include "ffdc/model.hpp"
#include "ffdc/panel.hpp"
#include "ffdc/price_process.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ffdc {

/// Cell key of the sufficient statistic. The first entry tags the cell family:
///   0 initial (l, d)            1 brand-level counts (j)
///   2 continuation (l, d, z)    3 log-denominator (l, d, z, e bits...)
///   4 net switching flow between k < j (k, j, flow)
using CellKey = std::vector<std::int64_t>;

struct StatisticVectors {
  std::map<CellKey, std::int64_t> s;
  Eigen::VectorXd c;
};

/// Single pass over t = 1..T. Durations are read through min(d, d*_l), which
/// is exact because values do not move past the cap.
StatisticVectors build_statistics(const ChoiceHistory& hist, const PriceView& prices, double mu,
                                  HForm h_form, std::span<const int> d_star);

/// Only the c vector (what the estimator needs).
Eigen::VectorXd identifying_vector(const ChoiceHistory& hist, const PriceView& prices, double mu,
                                   HForm h_form, std::span<const int> d_star);

enum class PairKind { no_duration_adjacent, no_duration_gapped, duration };

std::string to_string(PairKind kind);
PairKind parse_pair_kind(const std::string& name);

struct HistoryPairSpec {
  int id = 0;
  PairKind kind = PairKind::no_duration_adjacent;
  int k = 0, j = 0;    // brands; duration pairs use j only
  int n1 = 0, n2 = 0;  // zero-run lengths of no-duration pairs
  int n = 0;           // duration pairs
  /// Templates. The initial state is the window's own; templates carry (k, 1)
  /// or (j, 1) for display and oracle use.
  ChoiceHistory a, b;
  // 1-based inclusive periods over which z (resp. e) must not change; 0 = none.
  int z_from = 0, z_to = 0, e_from = 0, e_to = 0;
  std::vector<int> targets;  // theta indices loaded by c(A) - c(B)
  /// s(A) = s(B) under the restrictions. Duration pairs with n + 1 < d* are
  /// not: their log-odds still carry continuation values.
  bool sufficient = true;

  int length() const { return a.length(); }
  std::string label() const;
};

struct PairCatalog {
  int num_products = 0;
  int num_periods = 0;
  std::vector<int> d_star;
  std::vector<HistoryPairSpec> specs;

  /// Specs usable by the likelihood: sufficient and loading on some component.
  std::vector<const HistoryPairSpec*> estimable() const;
};

/// All parameterizations of the requested kinds that fit in T periods.
PairCatalog enumerate_pairs(int num_products, int num_periods, const std::vector<PairKind>& kinds,
                            std::vector<int> d_star);

/// Stacked period-to-period differences of z-ids over the z window, then of
/// each product's e over the e window. All zeros when the restrictions hold.
std::vector<double> price_restriction_residual(const HistoryPairSpec& spec,
                                               const PriceView& prices);

enum class MatchMode { exact, kernel };
enum class KernelKind { gaussian_product, epanechnikov_product };

std::string to_string(MatchMode mode);
std::string to_string(KernelKind kernel);
MatchMode parse_match_mode(const std::string& name);
KernelKind parse_kernel(const std::string& name);

double kernel_eval(KernelKind kernel, double u);
/// prod_c K(r_c / b_c). A single bandwidth applies to every component.
double kernel_weight(std::span<const double> residual, KernelKind kernel,
                     std::span<const double> bandwidth);
double kernel_weight(std::span<const double> residual, KernelKind kernel, double bandwidth);

/// +1 if the window's choices equal A, -1 if B, 0 otherwise.
int classify_history(const HistoryPairSpec& spec, std::span<const int> choices);

/// Exact: 1 iff the choices are A or B and the residual is exactly zero.
/// Kernel: K(r / b) times the same history indicator.
double match_pair(const HistoryPairSpec& spec, std::span<const int> choices,
                  const PriceView& prices, MatchMode mode, KernelKind kernel = {},
                  std::span<const double> bandwidth = {});

/// Consecutive non-overlapping windows of `length` periods starting at t = 0.
std::vector<int> window_starts(int num_periods, int length);

void write_catalog(const PairCatalog& catalog, std::ostream& out);

// ---------------------------------------------------------------------------
// Duration-cap detection

struct DurationGap {
  double gap = 0.0;
  double se = 0.0;
  double tol = 0.0;
  long count_a = 0, count_b = 0;
};

struct DurationProfileEntry {
  int n = 0;
  bool informative = false;
  DurationGap value;
};

enum class CapStatus { detected, none, censored };

struct DurationCapReport {
  int product = 0;
  std::vector<DurationProfileEntry> profile;
  CapStatus status = CapStatus::none;
  /// Detected cap; for censored profiles a lower bound. 0 when none.
  int cap = 0;

  std::string describe() const;
};

/// Returns nullopt when no information about n is available.
using DurationGapProvider = std::function<std::optional<DurationGap>(int n)>;

/// Gap at n is -beta_dep [min(n+1, d*) - min(n, d*)] plus continuation terms
/// that vanish once n + 1 >= d*, so the cap is one past the largest n with a
/// nonzero gap.
DurationCapReport detect_duration_cap(int product, int max_n, const DurationGapProvider& gap);

/// Empirical log(n_A / n_B) from duration windows of the panel, tolerance
/// `num_se` standard errors.
DurationCapReport detect_duration_cap(const PanelDataset& data, int product, int max_n,
                                      double num_se = 3.0);

/// Largest n with 2n + 2 <= T.
int max_duration_n(int num_periods);

/// The duration pair A_{j,n} / B_{j,n} as a stand-alone spec.
HistoryPairSpec duration_pair(int product, int n, std::span<const int> d_star);

}  // namespace ffdc
