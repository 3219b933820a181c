#include "ffdc/price_process.hpp"

#include "ffdc/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ffdc {

using nlohmann::json;

PriceMap parse_price_map(const std::string& name) {
  if (name == "hilo") return PriceMap::hilo;
  if (name == "additive") return PriceMap::additive;
  throw ValidationError("unknown rho_form '" + name + "' (expected hilo or additive)");
}

std::string to_string(PriceMap form) { return form == PriceMap::hilo ? "hilo" : "additive"; }

double rho(PriceMap form, ProductLevels z, double e) {
  if (form == PriceMap::hilo) return (1.0 - e) * z.regular + e * z.promotion;
  return z.regular + e;
}

std::vector<double> PriceProcess::prices(int z, std::span<const double> e) const {
  std::vector<double> out(num_products);
  for (int j = 0; j < num_products; ++j) out[j] = rho(rho_form, z_support[z][j], e[j]);
  return out;
}

std::vector<double> PriceProcess::stationary_distribution() const {
  const int n = num_z();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < 100000; ++it) {
    Eigen::RowVectorXd next = pi * z_transition;
    const double change = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (change < 1e-15) break;
  }
  pi /= pi.sum();
  return {pi.data(), pi.data() + n};
}

std::vector<double> PriceProcess::initial_distribution() const {
  return initial_z.empty() ? stationary_distribution() : initial_z;
}

namespace {

// Nodes and probability weights of the Gauss-Hermite rule for N(0,1)
// (Golub-Welsch on the probabilists' Hermite recurrence).
void standard_normal_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

std::vector<TransitoryOutcome> tensor_rule(const std::vector<double>& sd, int n) {
  std::vector<double> nodes, weights;
  standard_normal_rule(n, nodes, weights);
  const int J = static_cast<int>(sd.size());
  std::vector<TransitoryOutcome> out;
  std::vector<int> idx(J, 0);
  while (true) {
    TransitoryOutcome o;
    o.e.resize(J);
    o.prob = 1.0;
    for (int j = 0; j < J; ++j) {
      o.e[j] = sd[j] * nodes[idx[j]];
      o.prob *= weights[idx[j]];
    }
    out.push_back(std::move(o));
    int j = 0;
    while (j < J && ++idx[j] == n) idx[j++] = 0;
    if (j == J) break;
  }
  return out;
}

}  // namespace

void PriceProcess::finalize() {
  const int Z = num_z();
  if (num_products < 1) throw ValidationError("price process: num_products must be >= 1");
  if (Z < 1) throw ValidationError("price process: z_support is empty");
  for (const auto& levels : z_support)
    if (static_cast<int>(levels.size()) != num_products)
      throw ValidationError("price process: every z state needs one entry per product");
  if (z_transition.rows() != Z || z_transition.cols() != Z)
    throw ValidationError("price process: z_transition must be |Z| x |Z|");
  if (!initial_z.empty() && static_cast<int>(initial_z.size()) != Z)
    throw ValidationError("price process: initial_z must have |Z| entries");

  points_.clear();
  if (transitory == TransitoryKind::discrete) {
    if (static_cast<int>(promo_dist.size()) != Z)
      throw ValidationError("price process: promo_dist needs one row per z state");
    for (const auto& row : promo_dist) {
      if (row.empty()) throw ValidationError("price process: empty promo_dist row");
      for (const auto& o : row)
        if (static_cast<int>(o.e.size()) != num_products)
          throw ValidationError("price process: promo_dist e vectors need J entries");
    }
    points_ = promo_dist;
  } else {
    if (static_cast<int>(gaussian_sd.size()) != num_products)
      throw ValidationError("price process: transitory.sd needs J entries");
    if (quadrature_nodes < 1) throw ValidationError("price process: transitory.nodes must be >= 1");
    for (double s : gaussian_sd)
      if (!(s >= 0.0)) throw ValidationError("price process: transitory.sd must be >= 0");
    const auto rule = tensor_rule(gaussian_sd, quadrature_nodes);
    points_.assign(Z, rule);
  }
}

PriceDraw draw_transitory(const PriceProcess& proc, int z, RandomStream& rng) {
  PriceDraw draw;
  draw.z = z;
  if (proc.transitory == TransitoryKind::discrete) {
    const auto& row = proc.promo_dist[z];
    const double u = rng.uniform();
    double cum = 0.0;
    int pick = -1;
    for (int i = 0; i < static_cast<int>(row.size()); ++i) {
      if (row[i].prob <= 0.0) continue;
      cum += row[i].prob;
      pick = i;
      if (u < cum) break;
    }
    draw.e_index = pick;
    draw.e = row[pick].e;
  } else {
    draw.e.resize(proc.num_products);
    for (int j = 0; j < proc.num_products; ++j) draw.e[j] = proc.gaussian_sd[j] * rng.normal();
  }
  return draw;
}

namespace {
int draw_index(std::span<const double> probs, double u) {
  double cum = 0.0;
  int pick = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    pick = i;
    if (u < cum) break;
  }
  return pick;
}
}  // namespace

PriceDraw draw_initial_prices(const PriceProcess& proc, RandomStream& rng) {
  const auto init = proc.initial_distribution();
  const int z = draw_index(init, rng.uniform());
  return draw_transitory(proc, z, rng);
}

PriceDraw step_prices(const PriceProcess& proc, int z, RandomStream& rng) {
  std::vector<double> row(proc.z_transition.cols());
  for (int k = 0; k < proc.z_transition.cols(); ++k) row[k] = proc.z_transition(z, k);
  const int next = draw_index(row, rng.uniform());
  return draw_transitory(proc, next, rng);
}

ProcessDiagnostics validate_process(const PriceProcess& proc) {
  ProcessDiagnostics diag;
  const int Z = proc.num_z();
  auto flag = [&](bool& field, const std::string& msg) {
    field = false;
    diag.violations.push_back(msg);
  };

  for (int z = 0; z < Z; ++z) {
    double sum = 0.0;
    bool negative = false;
    for (int k = 0; k < proc.z_transition.cols(); ++k) {
      sum += proc.z_transition(z, k);
      negative = negative || proc.z_transition(z, k) < 0.0;
    }
    if (negative || std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "z_transition row " << z << " is not stochastic (sum " << sum << ")";
      flag(diag.rows_stochastic, msg.str());
    }
    if (z < proc.z_transition.cols() && !(proc.z_transition(z, z) > 0.0))
      flag(diag.z_can_repeat, "z state " + std::to_string(z) +
                                  " has zero self-transition probability; exact matching of "
                                  "persistent prices is impossible from it");
  }

  if (proc.rho_form == PriceMap::hilo) {
    for (int z = 0; z < Z; ++z)
      for (int j = 0; j < static_cast<int>(proc.z_support[z].size()); ++j) {
        const auto& lv = proc.z_support[z][j];
        if (!(lv.regular > lv.promotion && lv.promotion > 0.0))
          flag(diag.price_ordering, "z state " + std::to_string(z) + " product " +
                                        std::to_string(j + 1) +
                                        ": need regular > promotion > 0");
      }
  }

  if (proc.transitory == TransitoryKind::discrete) {
    for (int z = 0; z < static_cast<int>(proc.promo_dist.size()); ++z) {
      double sum = 0.0;
      bool negative = false;
      for (const auto& o : proc.promo_dist[z]) {
        sum += o.prob;
        negative = negative || o.prob < 0.0;
        if (proc.rho_form == PriceMap::hilo)
          for (double v : o.e)
            if (v != 0.0 && v != 1.0)
              flag(diag.price_ordering, "hilo promotion indicators must be 0 or 1");
      }
      if (negative || std::abs(sum - 1.0) > 1e-12)
        flag(diag.promo_rows_stochastic,
             "promo_dist row " + std::to_string(z) + " does not sum to 1");
    }
  } else {
    diag.e_can_repeat_exactly = false;
    diag.notes.push_back(
        "continuous transitory component: exact repeats have probability zero, use kernel "
        "weighting");
  }
  return diag;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

std::vector<double> doubles(const json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(where + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

PriceProcess price_process_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("price process must be a JSON object");
  reject_unknown(doc,
                 {"rho_form", "z_support", "z_transition", "promo_dist", "promo_prob",
                  "transitory", "initial_z"},
                 "price process");
  PriceProcess proc;
  proc.rho_form = parse_price_map(doc.value("rho_form", std::string("hilo")));

  if (!doc.contains("z_support") || !doc["z_support"].is_array())
    throw ValidationError("price process: z_support is required");
  for (const auto& zs : doc["z_support"]) {
    reject_unknown(zs, {"regular", "promotion", "level"}, "z_support entry");
    std::vector<double> reg, pro;
    if (zs.contains("level")) {
      reg = doubles(zs["level"], "z_support.level");
      pro.assign(reg.size(), 0.0);
    } else {
      if (!zs.contains("regular"))
        throw ValidationError("z_support entry needs 'regular' (or 'level')");
      reg = doubles(zs["regular"], "z_support.regular");
      pro = zs.contains("promotion") ? doubles(zs["promotion"], "z_support.promotion")
                                     : std::vector<double>(reg.size(), 0.0);
    }
    if (reg.size() != pro.size())
      throw ValidationError("z_support regular/promotion length mismatch");
    std::vector<ProductLevels> levels;
    for (size_t j = 0; j < reg.size(); ++j) levels.push_back({reg[j], pro[j]});
    proc.z_support.push_back(std::move(levels));
  }
  proc.num_products = proc.z_support.empty() ? 0 : static_cast<int>(proc.z_support[0].size());
  const int Z = proc.num_z();

  if (!doc.contains("z_transition")) throw ValidationError("price process: z_transition is required");
  const auto& tr = doc["z_transition"];
  if (!tr.is_array() || static_cast<int>(tr.size()) != Z)
    throw ValidationError("price process: z_transition must have |Z| rows");
  proc.z_transition.resize(Z, Z);
  for (int a = 0; a < Z; ++a) {
    auto row = doubles(tr[a], "z_transition row");
    if (static_cast<int>(row.size()) != Z)
      throw ValidationError("price process: z_transition must be square");
    for (int b = 0; b < Z; ++b) proc.z_transition(a, b) = row[b];
  }

  const int kinds = int(doc.contains("promo_dist")) + int(doc.contains("promo_prob")) +
                    int(doc.contains("transitory"));
  if (kinds != 1)
    throw ValidationError(
        "price process: give exactly one of promo_dist, promo_prob or transitory");

  if (doc.contains("promo_dist")) {
    for (const auto& row : doc["promo_dist"]) {
      std::vector<TransitoryOutcome> outcomes;
      for (const auto& o : row) {
        reject_unknown(o, {"e", "prob"}, "promo_dist outcome");
        outcomes.push_back({doubles(o.at("e"), "promo_dist.e"), o.at("prob").get<double>()});
      }
      proc.promo_dist.push_back(std::move(outcomes));
    }
  } else if (doc.contains("promo_prob")) {
    // independent promotions: expand to the full multinomial over {0,1}^J
    const int J = proc.num_products;
    for (const auto& row : doc["promo_prob"]) {
      const auto q = doubles(row, "promo_prob row");
      if (static_cast<int>(q.size()) != J)
        throw ValidationError("promo_prob rows need J entries");
      std::vector<TransitoryOutcome> outcomes;
      for (int mask = 0; mask < (1 << J); ++mask) {
        TransitoryOutcome o;
        o.prob = 1.0;
        for (int j = 0; j < J; ++j) {
          const int bit = (mask >> j) & 1;
          o.e.push_back(bit);
          o.prob *= bit ? q[j] : 1.0 - q[j];
        }
        outcomes.push_back(std::move(o));
      }
      proc.promo_dist.push_back(std::move(outcomes));
    }
  } else {
    const auto& t = doc["transitory"];
    reject_unknown(t, {"kind", "sd", "nodes"}, "transitory");
    if (t.value("kind", std::string("gaussian")) != "gaussian")
      throw ValidationError("transitory.kind must be 'gaussian'");
    proc.transitory = TransitoryKind::gaussian;
    proc.gaussian_sd = doubles(t.at("sd"), "transitory.sd");
    proc.quadrature_nodes = t.value("nodes", 7);
  }
  if (doc.contains("initial_z")) proc.initial_z = doubles(doc["initial_z"], "initial_z");

  proc.finalize();
  const auto diag = validate_process(proc);
  if (!diag.ok()) {
    std::string msg = "price process violates its assumptions:";
    for (const auto& v : diag.violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return proc;
}

json price_process_to_json(const PriceProcess& proc) {
  json doc;
  doc["rho_form"] = to_string(proc.rho_form);
  json support = json::array();
  for (const auto& levels : proc.z_support) {
    json reg = json::array(), pro = json::array();
    for (const auto& lv : levels) {
      reg.push_back(lv.regular);
      pro.push_back(lv.promotion);
    }
    support.push_back({{"regular", reg}, {"promotion", pro}});
  }
  doc["z_support"] = support;
  json tr = json::array();
  for (int a = 0; a < proc.z_transition.rows(); ++a) {
    json row = json::array();
    for (int b = 0; b < proc.z_transition.cols(); ++b) row.push_back(proc.z_transition(a, b));
    tr.push_back(row);
  }
  doc["z_transition"] = tr;
  if (proc.transitory == TransitoryKind::discrete) {
    json pd = json::array();
    for (const auto& row : proc.promo_dist) {
      json r = json::array();
      for (const auto& o : row) r.push_back({{"e", o.e}, {"prob", o.prob}});
      pd.push_back(r);
    }
    doc["promo_dist"] = pd;
  } else {
    doc["transitory"] = {
        {"kind", "gaussian"}, {"sd", proc.gaussian_sd}, {"nodes", proc.quadrature_nodes}};
  }
  if (!proc.initial_z.empty()) doc["initial_z"] = proc.initial_z;
  return doc;
}

PriceProcess load_price_process(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open price process file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("price process file '" + path + "': " + e.what());
  }
  return price_process_from_json(doc);
}

PriceView PriceView::window(int start, int length) const {
  if (start < 0 || length < 0 || start + length > periods())
    throw ContractViolation("PriceView::window out of range");
  const size_t J = num_products;
  return {num_products, z.subspan(start, length), e.subspan(start * J, length * J),
          p.subspan(start * J, length * J)};
}

void PricePath::push_back(const PriceProcess& proc, int z_state,
                          std::span<const double> transitory) {
  num_products = proc.num_products;
  z.push_back(z_state);
  e.insert(e.end(), transitory.begin(), transitory.end());
  const auto prices = proc.prices(z_state, transitory);
  p.insert(p.end(), prices.begin(), prices.end());
}

PricePath PricePath::constant(const PriceProcess& proc, int z_state,
                              std::span<const double> transitory, int periods) {
  PricePath path;
  path.num_products = proc.num_products;
  for (int t = 0; t < periods; ++t) path.push_back(proc, z_state, transitory);
  return path;
}

}  // namespace ffdc
