#include "ffdc/stats_catalog.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ffdc {

namespace {

int capped(int duration, int brand, std::span<const int> d_star) {
  return std::min(duration, d_star[brand - 1]);
}

void check_inputs(const ChoiceHistory& hist, const PriceView& prices, std::span<const int> d_star) {
  const int J = prices.num_products;
  if (prices.periods() != hist.length())
    throw ContractViolation("build_statistics: price path and history lengths differ");
  if (static_cast<int>(d_star.size()) != J)
    throw ContractViolation("build_statistics: d_star must have J entries");
  if (hist.initial.last_brand < 1 || hist.initial.last_brand > J || hist.initial.duration < 1)
    throw ContractViolation("build_statistics: invalid initial state");
  for (int y : hist.choices)
    if (y < 0 || y > J) throw ContractViolation("build_statistics: choice out of range");
}

}  // namespace

StatisticVectors build_statistics(const ChoiceHistory& hist, const PriceView& prices, double mu,
                                  HForm h_form, std::span<const int> d_star) {
  check_inputs(hist, prices, d_star);
  const int J = prices.num_products;
  const ThetaLayout layout(J);
  const int D = *std::max_element(d_star.begin(), d_star.end());

  StatisticVectors out;
  out.c = Eigen::VectorXd::Zero(layout.size());
  out.s[{0, hist.initial.last_brand, hist.initial.duration}] += 1;

  // flows[k][j]: number of k -> j switches
  std::vector<std::vector<int>> flows(J + 1, std::vector<int>(J + 1, 0));
  EndogenousState x{hist.initial.last_brand, std::min(hist.initial.duration, D)};
  for (int t = 0; t < hist.length(); ++t) {
    const int y = hist.choices[t];
    const int z = prices.z[t];
    const auto e = prices.e_at(t);
    const auto p = prices.p_at(t);

    CellKey sigma_cell{3, x.last_brand, capped(x.duration, x.last_brand, d_star), z};
    for (double v : e) sigma_cell.push_back(std::bit_cast<std::int64_t>(v));
    out.s[sigma_cell] += 1;

    if (y == 0) {
      out.s[{1, x.last_brand}] += 1;
      out.c[0] += h_eval(h_form, mu);
      out.c[layout.dep_index(x.last_brand)] -= capped(x.duration, x.last_brand, d_star);
    } else {
      out.s[{1, y}] += 1;
      out.c[0] += h_eval(h_form, mu - p[y - 1]);
      if (y != x.last_brand) {
        // each switch carries half of the symmetric combination; the
        // antisymmetric remainder is a function of the net flow below
        out.c[layout.pair_index(x.last_brand, y)] -= 0.5;
        ++flows[x.last_brand][y];
      }
    }
    x = transition(y, x, J, D);
    out.s[{2, x.last_brand, capped(x.duration, x.last_brand, d_star), z}] += 1;
  }
  for (int k = 1; k <= J; ++k)
    for (int j = k + 1; j <= J; ++j) {
      const int net = flows[k][j] - flows[j][k];
      if (net != 0) out.s[{4, k, j, net}] += 1;
    }
  return out;
}

Eigen::VectorXd identifying_vector(const ChoiceHistory& hist, const PriceView& prices, double mu,
                                   HForm h_form, std::span<const int> d_star) {
  check_inputs(hist, prices, d_star);
  const int J = prices.num_products;
  const ThetaLayout layout(J);
  const int D = *std::max_element(d_star.begin(), d_star.end());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.size());
  EndogenousState x{hist.initial.last_brand, std::min(hist.initial.duration, D)};
  for (int t = 0; t < hist.length(); ++t) {
    const int y = hist.choices[t];
    if (y == 0) {
      c[0] += h_eval(h_form, mu);
      c[layout.dep_index(x.last_brand)] -= capped(x.duration, x.last_brand, d_star);
    } else {
      c[0] += h_eval(h_form, mu - prices.p_at(t)[y - 1]);
      if (y != x.last_brand) c[layout.pair_index(x.last_brand, y)] -= 0.5;
    }
    x = transition(y, x, J, D);
  }
  return c;
}

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::no_duration_adjacent:
      return "no_duration_adjacent";
    case PairKind::no_duration_gapped:
      return "no_duration_gapped";
    case PairKind::duration:
      return "duration";
  }
  return "?";
}

PairKind parse_pair_kind(const std::string& name) {
  if (name == "no_duration_adjacent" || name == "adjacent") return PairKind::no_duration_adjacent;
  if (name == "no_duration_gapped" || name == "gapped") return PairKind::no_duration_gapped;
  if (name == "duration") return PairKind::duration;
  throw ValidationError("unknown pair kind '" + name + "'");
}

std::string HistoryPairSpec::label() const {
  std::ostringstream out;
  switch (kind) {
    case PairKind::no_duration_adjacent:
      out << "adjacent(k=" << k << ",j=" << j << ")";
      break;
    case PairKind::no_duration_gapped:
      out << "gapped(k=" << k << ",j=" << j << ",n1=" << n1 << ",n2=" << n2 << ")";
      break;
    case PairKind::duration:
      out << "duration(j=" << j << ",n=" << n << ")";
      break;
  }
  return out.str();
}

std::vector<const HistoryPairSpec*> PairCatalog::estimable() const {
  std::vector<const HistoryPairSpec*> out;
  for (const auto& spec : specs)
    if (spec.sufficient && !spec.targets.empty()) out.push_back(&spec);
  return out;
}

namespace {

std::vector<int> zeros_run(int n) { return std::vector<int>(n, 0); }

void append(std::vector<int>& v, std::initializer_list<int> xs) { v.insert(v.end(), xs); }
void append(std::vector<int>& v, const std::vector<int>& xs) { v.insert(v.end(), xs.begin(), xs.end()); }

// Fill targets and the sufficiency flag by evaluating both templates on a
// constant price path, which satisfies every window restriction.
void classify_spec(HistoryPairSpec& spec, int J, std::span<const int> d_star) {
  const int L = spec.length();
  std::vector<int> z(L, 0);
  std::vector<double> e(static_cast<size_t>(L) * J, 0.0), p(static_cast<size_t>(L) * J, 1.0);
  const PriceView view{J, z, e, p};
  const auto sa = build_statistics(spec.a, view, 2.0, HForm::linear, d_star);
  const auto sb = build_statistics(spec.b, view, 2.0, HForm::linear, d_star);
  spec.sufficient = sa.s == sb.s;
  const Eigen::VectorXd gap = sa.c - sb.c;
  spec.targets.clear();
  // no-duration pairs load on gamma through the free e at the swap period
  if (spec.kind != PairKind::duration) spec.targets.push_back(ThetaLayout::gamma_index());
  for (int i = 1; i < gap.size(); ++i)
    if (gap[i] != 0.0) spec.targets.push_back(i);
}

HistoryPairSpec no_duration_pair(int k, int j, int n1, int n2, int J,
                                 std::span<const int> d_star) {
  HistoryPairSpec spec;
  spec.kind = (n1 == 0 && n2 == 0) ? PairKind::no_duration_adjacent : PairKind::no_duration_gapped;
  spec.k = k;
  spec.j = j;
  spec.n1 = n1;
  spec.n2 = n2;
  spec.a.initial = spec.b.initial = {k, 1};
  auto& a = spec.a.choices;
  append(a, {k});
  append(a, zeros_run(n1));
  append(a, {j});
  append(a, zeros_run(n2));
  append(a, {k});
  append(a, zeros_run(n2));
  append(a, {j});
  auto& b = spec.b.choices;
  append(b, {k});
  append(b, zeros_run(n1));
  append(b, {k});
  append(b, zeros_run(n2));
  append(b, {j});
  append(b, zeros_run(n2));
  append(b, {j});
  const int L = n1 + 2 * n2 + 4;
  spec.z_from = n1 + 2;
  spec.z_to = L;
  spec.e_from = n1 + 3;
  spec.e_to = L;
  classify_spec(spec, J, d_star);
  return spec;
}

}  // namespace

HistoryPairSpec duration_pair(int product, int n, std::span<const int> d_star) {
  const int J = static_cast<int>(d_star.size());
  if (product < 1 || product > J || n < 1)
    throw ContractViolation("duration_pair: invalid product or n");
  HistoryPairSpec spec;
  spec.kind = PairKind::duration;
  spec.j = product;
  spec.n = n;
  spec.a.initial = spec.b.initial = {product, 1};
  append(spec.a.choices, {product});
  append(spec.a.choices, zeros_run(n - 1));
  append(spec.a.choices, {product});
  append(spec.a.choices, zeros_run(n + 1));
  append(spec.b.choices, {product});
  append(spec.b.choices, zeros_run(n));
  append(spec.b.choices, {product});
  append(spec.b.choices, zeros_run(n));
  spec.z_from = spec.e_from = 1;
  spec.z_to = spec.e_to = 2 * n + 2;
  classify_spec(spec, J, d_star);
  return spec;
}

int max_duration_n(int num_periods) { return (num_periods - 2) / 2; }

PairCatalog enumerate_pairs(int num_products, int num_periods, const std::vector<PairKind>& kinds,
                            std::vector<int> d_star) {
  if (num_products < 1 || num_periods < 1)
    throw ContractViolation("enumerate_pairs: invalid dimensions");
  if (static_cast<int>(d_star.size()) != num_products)
    throw ContractViolation("enumerate_pairs: d_star must have J entries");
  PairCatalog cat;
  cat.num_products = num_products;
  cat.num_periods = num_periods;
  cat.d_star = std::move(d_star);
  const int J = num_products, T = num_periods;

  auto has = [&](PairKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  if (has(PairKind::no_duration_adjacent) && T >= 4)
    for (int k = 1; k <= J; ++k)
      for (int j = 1; j <= J; ++j)
        if (k != j) cat.specs.push_back(no_duration_pair(k, j, 0, 0, J, cat.d_star));
  if (has(PairKind::no_duration_gapped))
    for (int n1 = 0; n1 + 4 <= T; ++n1)
      for (int n2 = 0; n1 + 2 * n2 + 4 <= T; ++n2) {
        if (n1 == 0 && n2 == 0) continue;
        for (int k = 1; k <= J; ++k)
          for (int j = 1; j <= J; ++j)
            if (k != j) cat.specs.push_back(no_duration_pair(k, j, n1, n2, J, cat.d_star));
      }
  if (has(PairKind::duration))
    for (int j = 1; j <= J; ++j)
      for (int n = 1; n <= max_duration_n(T); ++n)
        cat.specs.push_back(duration_pair(j, n, cat.d_star));

  for (size_t m = 0; m < cat.specs.size(); ++m) cat.specs[m].id = static_cast<int>(m);
  return cat;
}

std::vector<double> price_restriction_residual(const HistoryPairSpec& spec,
                                               const PriceView& prices) {
  if (prices.periods() < spec.length())
    throw ContractViolation("price_restriction_residual: price path shorter than the pair");
  std::vector<double> r;
  if (spec.z_from > 0)
    for (int t = spec.z_from; t < spec.z_to; ++t)
      r.push_back(static_cast<double>(prices.z[t] - prices.z[t - 1]));
  if (spec.e_from > 0)
    for (int j = 0; j < prices.num_products; ++j)
      for (int t = spec.e_from; t < spec.e_to; ++t)
        r.push_back(prices.e_at(t)[j] - prices.e_at(t - 1)[j]);
  return r;
}

std::string to_string(MatchMode mode) { return mode == MatchMode::exact ? "exact" : "kernel"; }

std::string to_string(KernelKind kernel) {
  return kernel == KernelKind::gaussian_product ? "gaussian_product" : "epanechnikov_product";
}

MatchMode parse_match_mode(const std::string& name) {
  if (name == "exact") return MatchMode::exact;
  if (name == "kernel") return MatchMode::kernel;
  throw ValidationError("unknown estimation mode '" + name + "' (expected exact or kernel)");
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "gaussian_product" || name == "gaussian") return KernelKind::gaussian_product;
  if (name == "epanechnikov_product" || name == "epanechnikov")
    return KernelKind::epanechnikov_product;
  throw ValidationError("unknown kernel '" + name + "'");
}

double kernel_eval(KernelKind kernel, double u) {
  if (kernel == KernelKind::gaussian_product)
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double kernel_weight(std::span<const double> residual, KernelKind kernel,
                     std::span<const double> bandwidth) {
  if (bandwidth.size() != residual.size())
    throw ContractViolation("kernel_weight: one bandwidth per residual component required");
  double w = 1.0;
  for (size_t c = 0; c < residual.size(); ++c) {
    if (!(bandwidth[c] > 0.0)) throw ContractViolation("kernel_weight: bandwidth must be positive");
    w *= kernel_eval(kernel, residual[c] / bandwidth[c]);
  }
  return w;
}

double kernel_weight(std::span<const double> residual, KernelKind kernel, double bandwidth) {
  const std::vector<double> b(residual.size(), bandwidth);
  if (!(bandwidth > 0.0)) throw ContractViolation("kernel_weight: bandwidth must be positive");
  return kernel_weight(residual, kernel, b);
}

int classify_history(const HistoryPairSpec& spec, std::span<const int> choices) {
  if (static_cast<int>(choices.size()) != spec.length()) return 0;
  if (std::equal(choices.begin(), choices.end(), spec.a.choices.begin())) return 1;
  if (std::equal(choices.begin(), choices.end(), spec.b.choices.begin())) return -1;
  return 0;
}

double match_pair(const HistoryPairSpec& spec, std::span<const int> choices,
                  const PriceView& prices, MatchMode mode, KernelKind kernel,
                  std::span<const double> bandwidth) {
  if (classify_history(spec, choices) == 0) return 0.0;
  const auto r = price_restriction_residual(spec, prices);
  if (mode == MatchMode::exact)
    return std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; }) ? 1.0 : 0.0;
  return kernel_weight(r, kernel, bandwidth);
}

std::vector<int> window_starts(int num_periods, int length) {
  std::vector<int> out;
  if (length < 1) return out;
  for (int s = 0; s + length <= num_periods; s += length) out.push_back(s);
  return out;
}

namespace {

std::string history_string(const ChoiceHistory& h) {
  std::string s = "(";
  for (size_t t = 0; t < h.choices.size(); ++t) {
    if (t) s += ',';
    s += std::to_string(h.choices[t]);
  }
  return s + ")";
}

}  // namespace

void write_catalog(const PairCatalog& catalog, std::ostream& out) {
  const ThetaLayout layout(catalog.num_products);
  out << "# pair catalog: J=" << catalog.num_products << " T=" << catalog.num_periods
      << " d*=(";
  for (size_t j = 0; j < catalog.d_star.size(); ++j) out << (j ? "," : "") << catalog.d_star[j];
  out << ") pairs=" << catalog.specs.size() << "\n";
  for (const auto& spec : catalog.specs) {
    out << spec.id << ' ' << spec.label() << "  A=" << history_string(spec.a)
        << " B=" << history_string(spec.b);
    if (spec.z_from) out << "  z-const[" << spec.z_from << ".." << spec.z_to << "]";
    if (spec.e_from) out << " e-const[" << spec.e_from << ".." << spec.e_to << "]";
    out << "  targets={";
    for (size_t i = 0; i < spec.targets.size(); ++i)
      out << (i ? "," : "") << layout.name(spec.targets[i]);
    out << "}";
    if (!spec.sufficient) out << "  (not sufficient: continuation values remain)";
    else if (spec.targets.empty()) out << "  (uninformative)";
    out << '\n';
  }
}

std::string DurationCapReport::describe() const {
  std::ostringstream out;
  out << "product " << product << ": ";
  switch (status) {
    case CapStatus::detected:
      out << "d* = " << cap;
      break;
    case CapStatus::none:
      out << "no duration dependence detected";
      break;
    case CapStatus::censored:
      out << "d* >= " << cap << " (censored by the panel length)";
      break;
  }
  return out.str();
}

DurationCapReport detect_duration_cap(int product, int max_n, const DurationGapProvider& gap) {
  DurationCapReport report;
  report.product = product;
  int largest = 0;
  for (int n = 1; n <= max_n; ++n) {
    DurationProfileEntry entry;
    entry.n = n;
    if (auto g = gap(n)) {
      entry.informative = true;
      entry.value = *g;
      if (std::abs(g->gap) > g->tol) largest = n;
    }
    report.profile.push_back(entry);
  }
  if (largest == 0) {
    report.status = CapStatus::none;
    report.cap = 0;
  } else if (largest == max_n) {
    report.status = CapStatus::censored;
    report.cap = max_n + 1;
  } else {
    report.status = CapStatus::detected;
    report.cap = largest + 1;
  }
  return report;
}

DurationCapReport detect_duration_cap(const PanelDataset& data, int product, int max_n,
                                      double num_se) {
  const int J = data.num_products();
  if (product < 1 || product > J) throw ContractViolation("detect_duration_cap: invalid product");
  // templates only; the caps passed here do not affect matching
  const std::vector<int> caps(J, max_n + 1);
  auto provider = [&](int n) -> std::optional<DurationGap> {
    const auto spec = duration_pair(product, n, caps);
    DurationGap g;
    for (int i = 0; i < data.num_consumers(); ++i) {
      const auto y = data.choices(i);
      const auto prices = data.prices(i);
      for (int start : window_starts(data.num_periods(), spec.length())) {
        const auto yw = y.subspan(start, spec.length());
        const int cls = classify_history(spec, yw);
        if (cls == 0) continue;
        if (match_pair(spec, yw, prices.window(start, spec.length()), MatchMode::exact) == 0.0)
          continue;
        (cls > 0 ? g.count_a : g.count_b) += 1;
      }
    }
    if (g.count_a == 0 || g.count_b == 0) return std::nullopt;
    g.gap = std::log(static_cast<double>(g.count_a) / static_cast<double>(g.count_b));
    g.se = std::sqrt(1.0 / g.count_a + 1.0 / g.count_b);
    g.tol = num_se * g.se;
    return g;
  };
  return detect_duration_cap(product, max_n, provider);
}

}  // namespace ffdc
