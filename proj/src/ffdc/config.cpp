#include "ffdc/config.hpp"

#include "ffdc/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ffdc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError("config: " + path + ": " + msg);
}

// Object reader that remembers which keys were consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* opt(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& req(const std::string& key) {
    const json* v = opt(key);
    if (!v) fail(sub(key), "required field is missing");
    return *v;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(sub(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long>() >= 0) return static_cast<std::uint64_t>(v.get<long>());
  fail(path, "expected a nonnegative integer");
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path, int expected_size) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  if (expected_size >= 0 && static_cast<int>(v.size()) != expected_size)
    fail(path, "expected " + std::to_string(expected_size) + " entries, got " +
                   std::to_string(v.size()));
  std::vector<double> out;
  for (size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> integers(const json& v, const std::string& path, int expected_size) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  if (expected_size >= 0 && static_cast<int>(v.size()) != expected_size)
    fail(path, "expected " + std::to_string(expected_size) + " entries, got " +
                   std::to_string(v.size()));
  std::vector<int> out;
  for (size_t i = 0; i < v.size(); ++i)
    out.push_back(static_cast<int>(integer(v[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

std::string resolve(const std::string& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.string();
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

// Re-raise a library ValidationError with the config path in front.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

void parse_model(Obj o, RunConfig& cfg) {
  auto& m = cfg.model;
  const long J = integer(o.req("J"), o.sub("J"));
  if (J < 1 || J > 50) fail(o.sub("J"), "must lie in 1..50");
  m = SimulationPrimitives::zeros(static_cast<int>(J));
  if (auto v = o.opt("h_form")) m.h_form = with_path(o.sub("h_form"), [&] { return parse_h_form(text(*v, o.sub("h_form"))); });
  if (auto v = o.opt("gamma")) m.gamma = number(*v, o.sub("gamma"));
  if (auto v = o.opt("beta_sc")) {
    const std::string p = o.sub("beta_sc");
    if (!v->is_array() || static_cast<long>(v->size()) != J)
      fail(p, "expected a JxJ array (rows: from brand, columns: to brand)");
    for (long k = 0; k < J; ++k) {
      const auto row = numbers((*v)[k], p + "[" + std::to_string(k) + "]", static_cast<int>(J));
      for (long j = 0; j < J; ++j) m.beta_sc(k + 1, j + 1) = row[j];
    }
  }
  if (auto v = o.opt("beta_dep")) m.beta_dep = numbers(*v, o.sub("beta_dep"), static_cast<int>(J));
  if (auto v = o.opt("d_star")) m.d_star = integers(*v, o.sub("d_star"), static_cast<int>(J));
  o.finish();
  with_path(o.path(), [&] {
    m.validate();
    return 0;
  });
}

ConsumerType parse_type(Obj o, int J, bool& has_weight) {
  ConsumerType t;
  t.alpha = numbers(o.req("alpha"), o.sub("alpha"), J);
  if (auto v = o.opt("delta")) t.delta = number(*v, o.sub("delta"));
  if (auto v = o.opt("mu")) t.mu = number(*v, o.sub("mu"));
  has_weight = false;
  if (auto v = o.opt("weight")) {
    t.weight = number(*v, o.sub("weight"));
    has_weight = true;
  }
  if (auto v = o.opt("initial")) {
    const std::string p = o.sub("initial");
    if (!v->is_array() || v->empty()) fail(p, "expected a nonempty array of {l, d, prob}");
    for (size_t i = 0; i < v->size(); ++i) {
      Obj cell((*v)[i], p + "[" + std::to_string(i) + "]");
      InitialCell c;
      c.state.last_brand = static_cast<int>(integer(cell.req("l"), cell.sub("l")));
      c.state.duration = static_cast<int>(integer(cell.req("d"), cell.sub("d")));
      c.prob = cell.opt("prob") ? number(*cell.opt("prob"), cell.sub("prob")) : 1.0;
      cell.finish();
      t.initial_dist.push_back(c);
    }
  } else {
    t.initial_dist.push_back({{1, 1}, 1.0});
  }
  o.finish();
  return t;
}

void parse_population(const json& v, RunConfig& cfg) {
  if (!v.is_array() || v.empty()) fail("population", "expected a nonempty array of consumer types");
  bool any_weight = false, all_weight = true;
  for (size_t i = 0; i < v.size(); ++i) {
    bool has = false;
    cfg.population.push_back(
        parse_type(Obj(v[i], "population[" + std::to_string(i) + "]"), cfg.model.num_products, has));
    any_weight |= has;
    all_weight &= has;
  }
  if (any_weight && !all_weight) fail("population", "give a weight to every type or to none");
  if (!any_weight)
    for (auto& t : cfg.population) t.weight = 1.0 / static_cast<double>(cfg.population.size());
  for (size_t i = 0; i < cfg.population.size(); ++i)
    with_path("population[" + std::to_string(i) + "]", [&] {
      cfg.population[i].validate(cfg.model.num_products, cfg.model.duration_cap());
      return 0;
    });
  with_path("population", [&] {
    validate_population(cfg.population, cfg.model.num_products, cfg.model.duration_cap());
    return 0;
  });
}

void parse_prices(const json& v, RunConfig& cfg) {
  if (!v.is_object()) fail("prices", "expected an object");
  if (v.contains("file")) {
    Obj o(v, "prices");
    cfg.prices_ref = resolve(cfg.base_dir, text(o.req("file"), "prices.file"));
    o.finish();
    cfg.prices = with_path("prices.file", [&] { return load_price_process(cfg.prices_ref); });
  } else {
    cfg.prices_ref = "inline";
    cfg.prices = with_path("prices", [&] { return price_process_from_json(v); });
  }
  if (cfg.prices->num_products != cfg.model.num_products)
    fail("prices", "process has " + std::to_string(cfg.prices->num_products) +
                       " products but model.J = " + std::to_string(cfg.model.num_products));
}

void parse_simulate(Obj o, RunConfig& cfg) {
  auto& s = cfg.simulate;
  if (auto v = o.opt("N")) s.num_consumers = static_cast<int>(integer(*v, o.sub("N")));
  if (auto v = o.opt("T")) s.num_periods = static_cast<int>(integer(*v, o.sub("T")));
  if (auto v = o.opt("seed")) s.seed = unsigned_integer(*v, o.sub("seed"));
  if (auto v = o.opt("price_paths"))
    s.price_paths = with_path(o.sub("price_paths"), [&] { return parse_price_path_mode(text(*v, o.sub("price_paths"))); });
  if (auto v = o.opt("threads")) s.threads = static_cast<int>(integer(*v, o.sub("threads")));
  o.finish();
  if (s.num_consumers < 1) fail(o.sub("N"), "must be >= 1");
  if (s.num_periods < 1) fail(o.sub("T"), "must be >= 1");
  if (s.threads < 1) fail(o.sub("threads"), "must be >= 1");
}

void parse_estimate(Obj o, RunConfig& cfg) {
  auto& e = cfg.estimate;
  auto& opt = e.options;
  opt.h_form = cfg.model.h_form;
  if (auto v = o.opt("mode"))
    opt.mode = with_path(o.sub("mode"), [&] { return parse_match_mode(text(*v, o.sub("mode"))); });
  if (auto v = o.opt("kernel"))
    opt.kernel = with_path(o.sub("kernel"), [&] { return parse_kernel(text(*v, o.sub("kernel"))); });
  if (auto v = o.opt("bandwidth")) {
    if (v->is_string()) {
      if (v->get<std::string>() != "rule") fail(o.sub("bandwidth"), "expected a positive number or \"rule\"");
      opt.bandwidth = 0.0;
    } else {
      opt.bandwidth = number(*v, o.sub("bandwidth"));
      if (!(opt.bandwidth > 0.0)) fail(o.sub("bandwidth"), "must be positive");
    }
  }
  if (auto v = o.opt("bandwidth_constant")) {
    opt.bandwidth_constant = number(*v, o.sub("bandwidth_constant"));
    if (!(opt.bandwidth_constant > 0.0)) fail(o.sub("bandwidth_constant"), "must be positive");
  }
  if (auto v = o.opt("tol")) {
    opt.tol = number(*v, o.sub("tol"));
    if (!(opt.tol > 0.0)) fail(o.sub("tol"), "must be positive");
  }
  if (auto v = o.opt("max_steps")) opt.max_steps = static_cast<int>(integer(*v, o.sub("max_steps")));
  if (auto v = o.opt("theta0")) {
    const auto t0 = numbers(*v, o.sub("theta0"), ThetaLayout(cfg.model.num_products).size());
    opt.theta0 = Eigen::Map<const Eigen::VectorXd>(t0.data(), static_cast<long>(t0.size()));
  }
  if (auto v = o.opt("pairs")) {
    if (!v->is_array() || v->empty()) fail(o.sub("pairs"), "expected a nonempty array of pair kinds");
    e.kinds.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      const std::string p = o.sub("pairs") + "[" + std::to_string(i) + "]";
      e.kinds.push_back(with_path(p, [&] { return parse_pair_kind(text((*v)[i], p)); }));
    }
  }
  if (auto v = o.opt("d_star")) {
    if (v->is_string()) {
      const auto s = v->get<std::string>();
      if (s == "detect") e.detect_d_star = true;
      else if (s != "model") fail(o.sub("d_star"), "expected an array, \"model\" or \"detect\"");
    } else {
      e.d_star = integers(*v, o.sub("d_star"), cfg.model.num_products);
      for (int d : e.d_star)
        if (d < 1) fail(o.sub("d_star"), "entries must be >= 1");
    }
  }
  if (auto v = o.opt("consumers")) e.consumers_path = resolve(cfg.base_dir, text(*v, o.sub("consumers")));
  if (auto v = o.opt("panel")) e.panel_path = resolve(cfg.base_dir, text(*v, o.sub("panel")));
  if (auto v = o.opt("detect_num_se")) e.detect_num_se = number(*v, o.sub("detect_num_se"));
  o.finish();
}

void parse_verify(Obj o, RunConfig& cfg) {
  auto& v = cfg.verify;
  if (auto x = o.opt("tol")) v.tol = number(*x, o.sub("tol"));
  if (auto x = o.opt("sufficiency_tol")) v.sufficiency_tol = number(*x, o.sub("sufficiency_tol"));
  if (auto x = o.opt("max_enumeration")) v.max_enumeration = integer(*x, o.sub("max_enumeration"));
  if (auto x = o.opt("T")) v.num_periods = static_cast<int>(integer(*x, o.sub("T")));
  if (auto x = o.opt("corrupt_beta_sc_tilde"))
    v.corrupt_beta_sc_tilde = number(*x, o.sub("corrupt_beta_sc_tilde"));
  o.finish();
  if (!(v.tol > 0.0)) fail(o.sub("tol"), "must be positive");
  if (!(v.sufficiency_tol > 0.0)) fail(o.sub("sufficiency_tol"), "must be positive");
  if (v.num_periods < 1) fail(o.sub("T"), "must be >= 1");
}

void parse_solver(Obj o, RunConfig& cfg) {
  if (auto v = o.opt("tol")) cfg.solve.tol = number(*v, o.sub("tol"));
  if (auto v = o.opt("max_iter")) cfg.solve.max_iter = static_cast<int>(integer(*v, o.sub("max_iter")));
  o.finish();
  if (!(cfg.solve.tol > 0.0)) fail(o.sub("tol"), "must be positive");
  if (cfg.solve.max_iter < 1) fail(o.sub("max_iter"), "must be >= 1");
}

}  // namespace

const PriceProcess& RunConfig::price_process() const {
  if (!prices) throw ValidationError("config: prices: block is required for this command");
  return *prices;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

RunConfig parse_config(const json& doc, const std::string& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.hash = fnv1a(doc.dump());
  Obj root(doc, "");
  parse_model(Obj(root.req("model"), "model"), cfg);
  if (auto v = root.opt("population")) parse_population(*v, cfg);
  if (auto v = root.opt("prices")) parse_prices(*v, cfg);
  if (auto v = root.opt("simulate")) parse_simulate(Obj(*v, "simulate"), cfg);
  if (auto v = root.opt("estimate")) parse_estimate(Obj(*v, "estimate"), cfg);
  else cfg.estimate.options.h_form = cfg.model.h_form;
  if (auto v = root.opt("verify")) parse_verify(Obj(*v, "verify"), cfg);
  if (auto v = root.opt("solver")) parse_solver(Obj(*v, "solver"), cfg);
  root.finish();
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(doc, base_dir);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config_text(buf.str(), std::filesystem::path(path).parent_path().string());
  cfg.source = path;
  return cfg;
}

}  // namespace ffdc
