#include "ffdc/simulator.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace ffdc {

PricePathMode parse_price_path_mode(const std::string& name) {
  if (name == "shared") return PricePathMode::shared;
  if (name == "per_consumer" || name == "independent") return PricePathMode::per_consumer;
  throw ValidationError("unknown price path mode '" + name + "' (expected shared or per_consumer)");
}

std::string to_string(PricePathMode mode) {
  return mode == PricePathMode::shared ? "shared" : "per_consumer";
}

int draw_choice(std::span<const double> row, double u) {
  if (row.empty()) throw ContractViolation("draw_choice: empty probability row");
  double cum = 0.0;
  int last_positive = -1;
  for (size_t y = 0; y < row.size(); ++y) {
    if (row[y] > 0.0) last_positive = static_cast<int>(y);
    cum += row[y];
    if (row[y] > 0.0 && u < cum) return static_cast<int>(y);
  }
  // rounding left u above the accumulated mass
  if (last_positive < 0) throw ContractViolation("draw_choice: row has no positive mass");
  return last_positive;
}

int draw_choice(std::span<const double> row, RandomStream& rng) {
  return draw_choice(row, rng.uniform());
}

PricePath draw_price_path(const PriceProcess& proc, int periods, RandomStream& rng) {
  PricePath path;
  path.num_products = proc.num_products;
  if (periods < 1) return path;
  PriceDraw d = draw_initial_prices(proc, rng);
  path.push_back(proc, d.z, d.e);
  for (int t = 1; t < periods; ++t) {
    d = step_prices(proc, d.z, rng);
    path.push_back(proc, d.z, d.e);
  }
  return path;
}

namespace {

// e_index of every period of a path (-1 when e is off the integration grid)
std::vector<int> grid_indices(const PriceProcess& proc, const PricePath& path) {
  std::vector<int> idx(path.periods(), -1);
  if (proc.transitory != TransitoryKind::discrete) return idx;
  const auto view = path.view();
  for (int t = 0; t < path.periods(); ++t) {
    const auto& pts = proc.integration_points(view.z[t]);
    const auto e = view.e_at(t);
    for (size_t k = 0; k < pts.size(); ++k)
      if (std::equal(e.begin(), e.end(), pts[k].e.begin())) {
        idx[t] = static_cast<int>(k);
        break;
      }
  }
  return idx;
}

}  // namespace

PanelDataset simulate_panel(const std::vector<ConsumerSolution>& solutions,
                            const std::vector<double>& weights,
                            const SimulationSettings& settings) {
  if (solutions.empty() || solutions.size() != weights.size())
    throw ContractViolation("simulate_panel: one weight per solved type required");
  if (settings.num_consumers < 1 || settings.num_periods < 1)
    throw ContractViolation("simulate_panel: N and T must be >= 1");
  const auto& prim = solutions.front().primitives();
  const auto& proc = solutions.front().process();
  const int J = prim.num_products;
  const int T = settings.num_periods;
  const int N = settings.num_consumers;
  const int D = prim.duration_cap();

  PanelDataset data(J, T, N);
  data.seed = settings.seed;

  PricePath shared;
  std::vector<int> shared_idx;
  if (settings.price_paths == PricePathMode::shared) {
    RandomStream market(settings.seed, 0);
    shared = draw_price_path(proc, T, market);
    shared_idx = grid_indices(proc, shared);
  }

  auto simulate_one = [&](int i) {
    RandomStream rng(settings.seed, 2 * static_cast<std::uint64_t>(i) + 1);
    const int type = draw_choice(weights, rng);
    const auto& sol = solutions[type];
    const auto& cons = sol.consumer();
    std::vector<double> init_probs;
    for (const auto& cell : cons.initial_dist) init_probs.push_back(cell.prob);
    EndogenousState x = cons.initial_dist[draw_choice(init_probs, rng)].state;
    data.set_consumer(i, i + 1, cons.mu, x, type);

    PricePath own;
    std::vector<int> own_idx;
    if (settings.price_paths == PricePathMode::per_consumer) {
      RandomStream market(settings.seed, 2 * static_cast<std::uint64_t>(i) + 2);
      own = draw_price_path(proc, T, market);
      own_idx = grid_indices(proc, own);
    }
    const PricePath& path = settings.price_paths == PricePathMode::shared ? shared : own;
    const std::vector<int>& idx = settings.price_paths == PricePathMode::shared ? shared_idx : own_idx;
    const auto view = path.view();

    x.duration = std::min(x.duration, D);
    for (int t = 0; t < T; ++t) {
      const int z = view.z[t];
      int y;
      if (idx[t] >= 0) {
        y = draw_choice(sol.values().ccp(x.last_brand, x.duration, z, idx[t]), rng);
      } else {
        const auto row = sol.choice_probabilities(x, z, view.e_at(t));
        y = draw_choice(row, rng);
      }
      data.set_period(i, t, y, z, view.e_at(t), view.p_at(t));
      x = transition(y, x, J, D);
    }
  };

  const int threads = std::clamp(settings.threads, 1, std::max(1, N));
  if (threads == 1) {
    for (int i = 0; i < N; ++i) simulate_one(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < N; i += threads) simulate_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return data;
}

PanelDataset simulate_panel(const std::vector<ConsumerType>& population,
                            const SimulationPrimitives& prim, const PriceProcess& proc,
                            const SimulationSettings& settings) {
  prim.validate();
  validate_population(population, prim.num_products, prim.duration_cap());
  std::vector<ConsumerSolution> solutions;
  std::vector<double> weights;
  for (const auto& type : population) {
    solutions.emplace_back(prim, type, proc, settings.solve);
    weights.push_back(type.weight);
  }
  return simulate_panel(solutions, weights, settings);
}

}  // namespace ffdc
