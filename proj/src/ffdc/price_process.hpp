#pragma once

// Two-component price process: a persistent Markov component z and a
// transitory component e that is independent over time given z.

#include "ffdc/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace ffdc {

enum class PriceMap { hilo, additive };
enum class TransitoryKind { discrete, gaussian };

PriceMap parse_price_map(const std::string& name);
std::string to_string(PriceMap form);

/// Persistent component of one product. Hi-Lo uses both levels; the additive
/// map uses `regular` as the level.
struct ProductLevels {
  double regular = 0.0;
  double promotion = 0.0;
};

/// p = rho(z, e). hilo: (1-e) z_reg + e z_pro; additive: z_reg + e.
double rho(PriceMap form, ProductLevels z, double e);

struct TransitoryOutcome {
  std::vector<double> e;
  double prob = 0.0;
};

struct PriceProcess {
  int num_products = 0;
  PriceMap rho_form = PriceMap::hilo;
  std::vector<std::vector<ProductLevels>> z_support;  // [z][product]
  Eigen::MatrixXd z_transition;                       // row-stochastic
  TransitoryKind transitory = TransitoryKind::discrete;
  std::vector<std::vector<TransitoryOutcome>> promo_dist;  // [z], discrete only
  std::vector<double> gaussian_sd;                         // [product], gaussian only
  int quadrature_nodes = 7;
  std::vector<double> initial_z;  // empty: stationary distribution

  int num_z() const { return static_cast<int>(z_support.size()); }
  std::vector<double> prices(int z, std::span<const double> e) const;

  /// Points integrating E[f(e) | z]: the support for discrete laws, a tensor
  /// Gauss-Hermite rule for gaussian ones. Built by finalize().
  const std::vector<TransitoryOutcome>& integration_points(int z) const { return points_[z]; }

  std::vector<double> stationary_distribution() const;
  std::vector<double> initial_distribution() const;

  /// Checks dimensions and builds integration points. Throws ValidationError.
  void finalize();

 private:
  std::vector<std::vector<TransitoryOutcome>> points_;
};

/// One period of the price process. e_index is the position of e in
/// integration_points(z) for discrete laws, -1 otherwise.
struct PriceDraw {
  int z = 0;
  int e_index = -1;
  std::vector<double> e;
};

PriceDraw draw_transitory(const PriceProcess& proc, int z, RandomStream& rng);
PriceDraw draw_initial_prices(const PriceProcess& proc, RandomStream& rng);
/// z' ~ F_z(. | z), e' ~ law(. | z'). Never looks at past e.
PriceDraw step_prices(const PriceProcess& proc, int z, RandomStream& rng);

struct ProcessDiagnostics {
  bool rows_stochastic = true;
  bool promo_rows_stochastic = true;
  bool price_ordering = true;
  bool z_can_repeat = true;        // Pr(z' = z) > 0 for every z
  bool e_can_repeat_exactly = true;  // repeated e has positive probability
  std::vector<std::string> violations;
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
};

ProcessDiagnostics validate_process(const PriceProcess& proc);

PriceProcess price_process_from_json(const nlohmann::json& doc);
nlohmann::json price_process_to_json(const PriceProcess& proc);
PriceProcess load_price_process(const std::string& path);

/// Read-only view over T periods of observed prices (row-major T x J).
struct PriceView {
  int num_products = 0;
  std::span<const int> z;
  std::span<const double> e;
  std::span<const double> p;

  int periods() const { return static_cast<int>(z.size()); }
  std::span<const double> e_at(int t) const {
    return e.subspan(static_cast<size_t>(t) * num_products, num_products);
  }
  std::span<const double> p_at(int t) const {
    return p.subspan(static_cast<size_t>(t) * num_products, num_products);
  }
  PriceView window(int start, int length) const;
};

/// Owning price path.
struct PricePath {
  int num_products = 0;
  std::vector<int> z;
  std::vector<double> e;
  std::vector<double> p;

  void push_back(const PriceProcess& proc, int z_state, std::span<const double> transitory);
  int periods() const { return static_cast<int>(z.size()); }
  PriceView view() const { return {num_products, z, e, p}; }

  /// The same (z, e) repeated for every period.
  static PricePath constant(const PriceProcess& proc, int z_state,
                            std::span<const double> transitory, int periods);
};

}  // namespace ffdc
