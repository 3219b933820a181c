#include "ffdc/commands.hpp"

#include "ffdc/errors.hpp"
#include "ffdc/oracle.hpp"
#include "ffdc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace ffdc {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void require_population(const RunConfig& cfg) {
  if (cfg.population.empty())
    throw ValidationError("config: population: block is required for this command");
}

}  // namespace

SimulateOutput cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  require_population(cfg);
  const auto& proc = cfg.price_process();
  SimulationSettings settings;
  settings.num_consumers = cfg.simulate.num_consumers;
  settings.num_periods = cfg.simulate.num_periods;
  settings.seed = cfg.simulate.seed;
  settings.price_paths = cfg.simulate.price_paths;
  settings.threads = cfg.simulate.threads;
  settings.solve = cfg.solve;

  SimulateOutput out;
  out.data = simulate_panel(cfg.population, cfg.model, proc, settings);
  out.data.price_process_ref = cfg.prices_ref;
  if (out_dir.empty()) return out;

  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  const std::string consumers = (dir / "consumers.csv").string();
  const std::string panel = (dir / "panel.csv").string();
  const std::string manifest = (dir / "manifest.json").string();
  write_panel_csv(out.data, consumers, panel);

  json m;
  m["seed"] = cfg.simulate.seed;
  m["config_hash"] = hex64(cfg.hash);
  m["config"] = cfg.source;
  m["J"] = cfg.model.num_products;
  m["N"] = settings.num_consumers;
  m["T"] = settings.num_periods;
  m["price_paths"] = to_string(settings.price_paths);
  m["price_process_ref"] = cfg.prices_ref;
  m["price_process"] = price_process_to_json(proc);
  m["files"] = {"consumers.csv", "panel.csv"};
  write_file_atomically(manifest, m.dump(2) + "\n");
  out.files = {consumers, panel, manifest};
  return out;
}

bool VerifyOutput::passed() const { return failures() == 0; }

int VerifyOutput::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [](const CheckLine& c) { return !c.passed; }));
}

namespace {

std::string format_check(const CheckLine& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s  %-58s lhs=% .15e rhs=% .15e |diff|=%.3e tol=%.1e",
                c.passed ? "PASS" : "FAIL", c.name.c_str(), c.lhs, c.rhs, std::abs(c.lhs - c.rhs),
                c.tol);
  return buf;
}

void add_check(VerifyOutput& out, std::string name, double lhs, double rhs, double tol) {
  CheckLine c{std::move(name), lhs, rhs, tol, std::abs(lhs - rhs) <= tol};
  out.checks.push_back(c);
}

// Second type for the cross-type comparisons: another population member with
// the same income if there is one, else the first type with tilted tastes.
ConsumerType companion_type(const RunConfig& cfg) {
  const auto& first = cfg.population.front();
  for (size_t i = 1; i < cfg.population.size(); ++i)
    if (cfg.population[i].mu == first.mu && cfg.population[i].alpha != first.alpha)
      return cfg.population[i];
  ConsumerType t = first;
  for (size_t j = 0; j < t.alpha.size(); ++j) t.alpha[j] += (j % 2 == 0) ? 0.7 : -0.4;
  return t;
}

// Support point at z differing from `base` in product j, if any.
const TransitoryOutcome* promotion_point(const PriceProcess& proc, int z,
                                         const std::vector<double>& base, int j) {
  for (const auto& pt : proc.integration_points(z))
    if (pt.e[j - 1] != base[j - 1]) return &pt;
  return nullptr;
}

}  // namespace

VerifyOutput cmd_verify(const RunConfig& cfg) {
  require_population(cfg);
  const auto& proc = cfg.price_process();
  const auto& prim = cfg.model;
  const int J = prim.num_products;
  const int T = cfg.verify.num_periods;
  const double tol = cfg.verify.tol;

  StructuralParams theta = theta_projection(prim);
  if (cfg.verify.corrupt_beta_sc_tilde != 0.0)
    for (int k = 1; k <= J; ++k)
      for (int j = k + 1; j <= J; ++j)
        theta.set_beta_sc_tilde(k, j, theta.beta_sc_tilde(k, j) + cfg.verify.corrupt_beta_sc_tilde);

  const ConsumerSolution s1(prim, cfg.population.front(), proc, cfg.solve);
  const ConsumerSolution s2(prim, companion_type(cfg), proc, cfg.solve);
  const std::vector<const ConsumerSolution*> sols{&s1, &s2};
  const auto base_e = proc.integration_points(0).front().e;
  const double mu = s1.consumer().mu;

  VerifyOutput out;
  std::vector<std::string> notes;

  // sufficiency on a constant path and on a drawn path
  {
    RandomStream rng(cfg.simulate.seed, 0);
    const std::vector<std::pair<std::string, PricePath>> paths{
        {"constant prices", PricePath::constant(proc, 0, base_e, T)},
        {"drawn prices", draw_price_path(proc, T, rng)}};
    for (const auto& [name, path] : paths) {
      try {
        const auto rep = sufficiency_check(s1, s2, theta, {1, 1}, path.view(),
                                           cfg.verify.sufficiency_tol, cfg.verify.max_enumeration);
        add_check(out, "sufficiency across types, " + name, rep.max_type_gap, 0.0,
                  cfg.verify.sufficiency_tol);
        add_check(out, "sufficiency closed form, " + name, rep.max_formula_gap, 0.0,
                  cfg.verify.sufficiency_tol);
        for (const auto& v : rep.violations) notes.push_back("  " + name + ": " + v);
      } catch (const ValidationError& e) {
        notes.push_back(std::string("sufficiency skipped: ") + e.what());
      }
    }
  }

  // catalog identities
  const auto catalog = enumerate_pairs(
      J, T, {PairKind::no_duration_adjacent, PairKind::no_duration_gapped, PairKind::duration},
      prim.d_star);
  const int D = prim.duration_cap();
  for (const auto& spec : catalog.specs) {
    std::vector<std::pair<std::string, PricePath>> variants;
    variants.emplace_back("const", PricePath::constant(proc, 0, base_e, spec.length()));
    if (spec.kind != PairKind::duration)
      if (const auto* promo = promotion_point(proc, 0, base_e, spec.j)) {
        PricePath p;
        for (int t = 0; t < spec.length(); ++t)
          p.push_back(proc, 0, t == spec.n1 + 1 ? promo->e : base_e);
        variants.emplace_back("promo", std::move(p));
      }
    for (const auto& [vname, path] : variants) {
      const auto view = path.view();
      for (size_t s = 0; s < sols.size(); ++s) {
        const auto& sol = *sols[s];
        const double lhs = log_odds(sol, spec.a, spec.b, view);
        double rhs;
        if (spec.kind == PairKind::duration) {
          const int j = spec.j, n = spec.n, cap = prim.cap(j);
          rhs = -theta.beta_dep(j) * (std::min(n + 1, cap) - std::min(n, cap)) +
                sol.values().v(j, std::min(n + 2, D), 0) - sol.values().v(j, std::min(n + 1, D), 0);
        } else {
          const int k = spec.k, j = spec.j;
          auto h = [&](int t, int brand) {
            return h_eval(prim.h_form, mu - view.p_at(t - 1)[brand - 1]);
          };
          const int t2 = spec.n1 + 2, t3 = spec.n1 + 3;
          rhs = -theta.beta_sc_tilde(k, j) +
                theta.gamma() * (h(t2, j) - h(t3, j) - h(t2, k) + h(t3, k));
        }
        add_check(out, "log-odds " + spec.label() + " " + vname + " type" + std::to_string(s + 1),
                  lhs, rhs, tol);
      }
    }
  }

  // duration profile and cap detection on a panel long enough for every cap
  const int Td = 2 * D + 2;
  const int max_n = max_duration_n(Td);
  for (int j = 1; j <= J; ++j) {
    for (int n = 1; n <= max_n; ++n)
      add_check(out, "duration profile j=" + std::to_string(j) + " n=" + std::to_string(n),
                duration_log_odds(s1, j, n), duration_log_odds_from_values(s1, j, n), tol);
    const auto rep = detect_duration_cap(s1, j, max_n);
    const bool visible = prim.dep(j) != 0.0 && prim.cap(j) > 1;
    const double expected = visible ? prim.cap(j) : 0.0;
    add_check(out, "detected d* j=" + std::to_string(j) + " (T=" + std::to_string(Td) + ")",
              rep.cap, expected, 0.0);
  }

  std::ostringstream rep;
  rep << "# verify: J=" << J << " T=" << T << " d*=(";
  for (int j = 0; j < J; ++j) rep << (j ? "," : "") << prim.d_star[j];
  rep << ") delta=" << s1.consumer().delta << " h=" << to_string(prim.h_form) << "\n";
  for (const auto& c : out.checks) rep << format_check(c) << "\n";
  for (const auto& n : notes) rep << n << "\n";
  rep << "verify: " << out.checks.size() << " checks, " << out.failures() << " failed\n";
  for (const auto& c : out.checks)
    if (!c.passed) {
      rep << "first failure: " << format_check(c) << "\n";
      break;
    }
  out.report = rep.str();
  return out;
}

PanelDataset load_dataset(const RunConfig& cfg, const std::string& consumers_path,
                          const std::string& panel_path) {
  const std::string c = consumers_path.empty() ? cfg.estimate.consumers_path : consumers_path;
  const std::string p = panel_path.empty() ? cfg.estimate.panel_path : panel_path;
  if (c.empty() || p.empty())
    throw ValidationError("config: estimate.consumers and estimate.panel name the dataset files");
  auto data = read_panel_csv(c, p);
  if (data.num_products() != cfg.model.num_products)
    throw ValidationError("dataset has " + std::to_string(data.num_products()) +
                          " products but model.J = " + std::to_string(cfg.model.num_products));
  return data;
}

namespace {

json reports_json(const std::vector<DurationCapReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json prof = json::array();
    for (const auto& e : r.profile) {
      json p{{"n", e.n}, {"informative", e.informative}};
      if (e.informative)
        p.update({{"gap", e.value.gap},
                  {"se", e.value.se},
                  {"tol", e.value.tol},
                  {"count_a", e.value.count_a},
                  {"count_b", e.value.count_b}});
      prof.push_back(p);
    }
    const char* status = r.status == CapStatus::detected ? "detected"
                         : r.status == CapStatus::none   ? "none"
                                                         : "censored";
    arr.push_back({{"product", r.product}, {"status", status}, {"cap", r.cap}, {"profile", prof}});
  }
  return arr;
}

std::string reports_text(const std::vector<DurationCapReport>& reports, bool with_counts) {
  std::ostringstream out;
  char buf[256];
  for (const auto& r : reports) {
    out << r.describe() << "\n";
    for (const auto& e : r.profile) {
      if (!e.informative) {
        std::snprintf(buf, sizeof buf, "  n=%d  uninformative (no A or no B window observed)\n", e.n);
      } else if (with_counts) {
        std::snprintf(buf, sizeof buf, "  n=%d  gap=% .6f  se=%.6f  tol=%.6f  nA=%ld nB=%ld\n", e.n,
                      e.value.gap, e.value.se, e.value.tol, e.value.count_a, e.value.count_b);
      } else {
        std::snprintf(buf, sizeof buf, "  n=%d  gap=% .12e  tol=%.1e\n", e.n, e.value.gap,
                      e.value.tol);
      }
      out << buf;
    }
  }
  return out.str();
}

}  // namespace

nlohmann::json DetectOutput::to_json() const { return {{"products", reports_json(reports)}}; }

DetectOutput cmd_detect_dstar(const RunConfig& cfg, const PanelDataset& data) {
  const int max_n = max_duration_n(data.num_periods());
  if (max_n < 1)
    throw ValidationError("detect-dstar needs T >= 4 (T = " + std::to_string(data.num_periods()) + ")");
  DetectOutput out;
  for (int j = 1; j <= data.num_products(); ++j)
    out.reports.push_back(detect_duration_cap(data, j, max_n, cfg.estimate.detect_num_se));
  out.report = reports_text(out.reports, true);
  return out;
}

DetectOutput cmd_detect_dstar_oracle(const RunConfig& cfg) {
  require_population(cfg);
  const ConsumerSolution sol(cfg.model, cfg.population.front(), cfg.price_process(), cfg.solve);
  const int max_n = max_duration_n(2 * cfg.model.duration_cap() + 2);
  DetectOutput out;
  for (int j = 1; j <= cfg.model.num_products; ++j)
    out.reports.push_back(detect_duration_cap(sol, j, max_n));
  out.report = reports_text(out.reports, false);
  return out;
}

EstimateOutput cmd_estimate(const RunConfig& cfg, const PanelDataset& data) {
  const int J = data.num_products();
  if (J != cfg.model.num_products)
    throw ValidationError("dataset and model.J disagree on the number of products");
  EstimateOutput out;
  if (cfg.estimate.detect_d_star) {
    out.d_star_source = "detected";
    const int max_n = max_duration_n(data.num_periods());
    for (int j = 1; j <= J; ++j) {
      if (max_n < 1) {
        out.d_star_used.push_back(1);
        continue;
      }
      auto rep = detect_duration_cap(data, j, max_n, cfg.estimate.detect_num_se);
      out.d_star_used.push_back(rep.status == CapStatus::none ? 1 : rep.cap);
      out.detection.push_back(std::move(rep));
    }
  } else if (!cfg.estimate.d_star.empty()) {
    out.d_star_source = "config";
    out.d_star_used = cfg.estimate.d_star;
  } else {
    out.d_star_source = "model";
    out.d_star_used = cfg.model.d_star;
  }
  const auto catalog = enumerate_pairs(J, data.num_periods(), cfg.estimate.kinds, out.d_star_used);
  out.result = fit(data, catalog, cfg.estimate.options);
  return out;
}

nlohmann::json EstimateOutput::to_json() const {
  auto j = ffdc::to_json(result);
  j["d_star"] = d_star_used;
  j["d_star_source"] = d_star_source;
  if (!detection.empty()) j["d_star_detection"] = reports_json(detection);
  return j;
}

std::string EstimateOutput::table() const {
  std::string out = format_table(result);
  out += "d* used: (";
  for (size_t j = 0; j < d_star_used.size(); ++j)
    out += (j ? "," : "") + std::to_string(d_star_used[j]);
  out += ") from " + d_star_source + "\n";
  if (result.mode == MatchMode::kernel) {
    for (const auto& t : result.tallies) {
      out += "bandwidth " + t.label + ":";
      char buf[32];
      for (double b : t.bandwidth) {
        std::snprintf(buf, sizeof buf, " %.4g", b);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace ffdc
