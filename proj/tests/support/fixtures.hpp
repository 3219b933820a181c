#pragma once

// Model configurations shared by the unit and acceptance tests.

#include "ffdc/model.hpp"
#include "ffdc/price_process.hpp"

#include <json.hpp>

#include <random>
#include <vector>

namespace fx {

struct Levels {
  double regular, promotion;
};

/// Hi-Lo process with independent promotions of probability q per product.
inline ffdc::PriceProcess hilo(const std::vector<std::vector<Levels>>& levels,
                               const std::vector<std::vector<double>>& transition, double q) {
  nlohmann::json doc;
  doc["rho_form"] = "hilo";
  for (const auto& zs : levels) {
    nlohmann::json reg = nlohmann::json::array(), pro = nlohmann::json::array();
    for (const auto& l : zs) {
      reg.push_back(l.regular);
      pro.push_back(l.promotion);
    }
    doc["z_support"].push_back({{"regular", reg}, {"promotion", pro}});
  }
  doc["z_transition"] = transition;
  for (size_t z = 0; z < levels.size(); ++z)
    doc["promo_prob"].push_back(std::vector<double>(levels[z].size(), q));
  return ffdc::price_process_from_json(doc);
}

/// Two-state Hi-Lo chain used by the reference configuration.
inline ffdc::PriceProcess reference_process() {
  return hilo({{{3.0, 2.0}, {3.2, 2.4}}, {{3.5, 2.5}, {3.0, 2.2}}}, {{0.9, 0.1}, {0.2, 0.8}}, 0.25);
}

/// J=2, gamma=1, linear h, beta_sc(1,2)=0.3, beta_sc(2,1)=0.5, beta_dep=(0.2,0.3), d*=(3,3).
inline ffdc::SimulationPrimitives reference_primitives() {
  auto p = ffdc::SimulationPrimitives::zeros(2);
  p.gamma = 1.0;
  p.beta_sc(1, 2) = 0.3;
  p.beta_sc(2, 1) = 0.5;
  p.beta_dep = {0.2, 0.3};
  p.d_star = {3, 3};
  p.h_form = ffdc::HForm::linear;
  return p;
}

inline ffdc::ConsumerType make_type(std::vector<double> alpha, double delta, double mu,
                                    ffdc::EndogenousState initial = {1, 1}, double weight = 1.0) {
  ffdc::ConsumerType t;
  t.alpha = std::move(alpha);
  t.delta = delta;
  t.mu = mu;
  t.initial_dist = {{initial, 1.0}};
  t.weight = weight;
  return t;
}

inline ffdc::ConsumerType reference_type() { return make_type({0.5, 0.2}, 0.95, 10.0); }

/// Primitives with random raw switching costs, depreciation and gamma.
inline ffdc::SimulationPrimitives random_primitives(int J, std::vector<int> d_star, ffdc::HForm h,
                                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto p = ffdc::SimulationPrimitives::zeros(J);
  p.gamma = 0.2 + 1.3 * u(rng);
  for (int k = 1; k <= J; ++k)
    for (int j = 1; j <= J; ++j)
      if (k != j) p.beta_sc(k, j) = 1.5 * u(rng) - 0.25;
  for (int j = 0; j < J; ++j) p.beta_dep[j] = 0.1 + 0.9 * u(rng);
  p.d_star = std::move(d_star);
  p.h_form = h;
  return p;
}

inline std::vector<double> random_alpha(int J, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> a(J);
  for (auto& x : a) x = u(rng);
  return a;
}

/// Estimation design: J=2, d*=(2,2), four taste types whose initial condition
/// is their favourite brand, Hi-Lo prices with promotion probability 0.25.
/// Prices are low relative to depreciation so that purchases are frequent.
struct EstimationDesign {
  ffdc::SimulationPrimitives prim;
  ffdc::PriceProcess proc;
  std::vector<ffdc::ConsumerType> population;
};

inline EstimationDesign estimation_design(double delta) {
  EstimationDesign d;
  d.prim = ffdc::SimulationPrimitives::zeros(2);
  d.prim.gamma = 1.0;
  d.prim.beta_sc(1, 2) = 0.2;
  d.prim.beta_sc(2, 1) = 0.1;
  d.prim.beta_dep = {1.0, 1.2};
  d.prim.d_star = {2, 2};
  d.prim.h_form = ffdc::HForm::linear;
  d.proc = hilo({{{1.0, 0.6}, {1.1, 0.7}}, {{1.2, 0.75}, {1.0, 0.65}}}, {{0.9, 0.1}, {0.1, 0.9}}, 0.25);
  const std::vector<std::vector<double>> alphas{{1.0, 0.8}, {0.8, 1.0}, {0.6, 0.5}, {0.2, -0.1}};
  const std::vector<double> weights{0.3, 0.3, 0.2, 0.2};
  for (size_t i = 0; i < alphas.size(); ++i) {
    const int fav = alphas[i][0] >= alphas[i][1] ? 1 : 2;
    d.population.push_back(make_type(alphas[i], delta, 5.0, {fav, 1}, weights[i]));
  }
  return d;
}

}  // namespace fx
