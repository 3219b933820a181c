#pragma once

// Synthetic panels drawn from the structural model. Choices are drawn straight
// from the logit CCPs of each consumer's type.

#include "ffdc/dp_solver.hpp"
#include "ffdc/panel.hpp"
#include "ffdc/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ffdc {

enum class PricePathMode { shared, per_consumer };

PricePathMode parse_price_path_mode(const std::string& name);
std::string to_string(PricePathMode mode);

struct SimulationSettings {
  int num_consumers = 1;
  int num_periods = 1;
  std::uint64_t seed = 0;
  PricePathMode price_paths = PricePathMode::per_consumer;
  int threads = 1;
  SolveOptions solve;
};

/// Random stream ids: consumer i uses 2i+1, its own market 2i+2, the shared
/// market 0. Output does not depend on the thread count.
PanelDataset simulate_panel(const std::vector<ConsumerType>& population,
                            const SimulationPrimitives& prim, const PriceProcess& proc,
                            const SimulationSettings& settings);

/// Same, reusing already solved types (one solution per population entry).
PanelDataset simulate_panel(const std::vector<ConsumerSolution>& solutions,
                            const std::vector<double>& weights, const SimulationSettings& settings);

/// Inverse-CDF draw: first index whose cumulative mass exceeds u.
int draw_choice(std::span<const double> row, double u);
int draw_choice(std::span<const double> row, RandomStream& rng);

/// T periods of the price process from the given stream.
PricePath draw_price_path(const PriceProcess& proc, int periods, RandomStream& rng);

}  // namespace ffdc
