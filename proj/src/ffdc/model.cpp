#include "ffdc/model.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ffdc {

HForm parse_h_form(const std::string& name) {
  if (name == "linear") return HForm::linear;
  if (name == "logarithmic" || name == "log") return HForm::logarithmic;
  throw ValidationError("unknown h_form '" + name + "' (expected linear or logarithmic)");
}

std::string to_string(HForm form) {
  return form == HForm::linear ? "linear" : "logarithmic";
}

double h_eval(HForm form, double c) {
  switch (form) {
    case HForm::linear:
      return c;
    case HForm::logarithmic:
      if (!(c > 0.0)) {
        std::ostringstream msg;
        msg << "logarithmic h evaluated at nonpositive consumption " << c;
        throw DomainError(msg.str());
      }
      return std::log(c);
  }
  return c;
}

EndogenousState transition(int choice, EndogenousState state, int num_products,
                           int duration_cap) {
  if (choice < 0 || choice > num_products)
    throw ContractViolation("transition: choice out of range");
  if (state.last_brand < 1 || state.last_brand > num_products || state.duration < 1 ||
      state.duration > duration_cap)
    throw ContractViolation("transition: state out of range");
  if (choice == 0) return {state.last_brand, std::min(state.duration + 1, duration_cap)};
  return {choice, 1};
}

int SimulationPrimitives::duration_cap() const {
  if (d_star.empty()) return 1;
  return *std::max_element(d_star.begin(), d_star.end());
}

void SimulationPrimitives::validate() const {
  const int J = num_products;
  if (J < 1) throw ValidationError("model.J must be >= 1");
  if (beta_sc.rows() != J + 1 || beta_sc.cols() != J + 1)
    throw ValidationError("model.beta_sc must be a JxJ brand matrix");
  for (int k = 0; k <= J; ++k) {
    if (beta_sc(k, k) != 0.0) throw ValidationError("model.beta_sc diagonal must be zero");
    if (beta_sc(k, 0) != 0.0 || beta_sc(0, k) != 0.0)
      throw ValidationError("model.beta_sc no-purchase entries must be zero");
  }
  if (static_cast<int>(beta_dep.size()) != J)
    throw ValidationError("model.beta_dep must have J entries");
  if (static_cast<int>(d_star.size()) != J)
    throw ValidationError("model.d_star must have J entries");
  for (int d : d_star)
    if (d < 1) throw ValidationError("model.d_star entries must be >= 1");
  if (!std::isfinite(gamma)) throw ValidationError("model.gamma must be finite");
}

SimulationPrimitives SimulationPrimitives::zeros(int num_products) {
  SimulationPrimitives p;
  p.num_products = num_products;
  p.beta_sc = Eigen::MatrixXd::Zero(num_products + 1, num_products + 1);
  p.beta_dep.assign(num_products, 0.0);
  p.d_star.assign(num_products, 1);
  return p;
}

double ConsumerType::probability_of_initial(EndogenousState s) const {
  double total = 0.0;
  for (const auto& cell : initial_dist)
    if (cell.state == s) total += cell.prob;
  return total;
}

void ConsumerType::validate(int num_products, int duration_cap) const {
  if (static_cast<int>(alpha.size()) != num_products)
    throw ValidationError("consumer type alpha must have J entries");
  if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("consumer type delta must lie in [0,1)");
  if (!(mu > 0.0)) throw ValidationError("consumer type mu must be positive");
  if (initial_dist.empty()) throw ValidationError("consumer type initial_dist is empty");
  double total = 0.0;
  for (const auto& cell : initial_dist) {
    if (cell.prob < 0.0) throw ValidationError("initial_dist entries must be nonnegative");
    if (cell.state.last_brand < 1 || cell.state.last_brand > num_products ||
        cell.state.duration < 1 || cell.state.duration > duration_cap)
      throw ValidationError("initial_dist cell outside the state space");
    total += cell.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("initial_dist must sum to 1");
  if (!(weight >= 0.0)) throw ValidationError("consumer type weight must be nonnegative");
}

void validate_population(const std::vector<ConsumerType>& population, int num_products,
                         int duration_cap) {
  if (population.empty()) throw ValidationError("population is empty");
  double total = 0.0;
  for (const auto& type : population) {
    type.validate(num_products, duration_cap);
    total += type.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("population weights must sum to 1");
}

ThetaLayout::ThetaLayout(int num_products) : num_products_(num_products) {
  if (num_products < 1) throw ContractViolation("ThetaLayout: need at least one product");
}

int ThetaLayout::pair_index(int k, int j) const {
  if (k == j || k < 1 || j < 1 || k > num_products_ || j > num_products_)
    throw ContractViolation("ThetaLayout: invalid product pair");
  const int a = std::min(k, j);
  const int b = std::max(k, j);
  // pairs ordered (1,2), (1,3), ..., (1,J), (2,3), ...
  const int before = (a - 1) * num_products_ - (a - 1) * a / 2;
  return 1 + before + (b - a - 1);
}

int ThetaLayout::dep_index(int brand) const {
  if (brand < 1 || brand > num_products_) throw ContractViolation("ThetaLayout: invalid brand");
  return 1 + num_products_ * (num_products_ - 1) / 2 + (brand - 1);
}

std::string ThetaLayout::name(int index) const {
  if (index == 0) return "gamma";
  for (int a = 1; a <= num_products_; ++a)
    for (int b = a + 1; b <= num_products_; ++b)
      if (pair_index(a, b) == index)
        return "beta_sc_tilde(" + std::to_string(a) + "," + std::to_string(b) + ")";
  for (int j = 1; j <= num_products_; ++j)
    if (dep_index(j) == index) return "beta_dep(" + std::to_string(j) + ")";
  throw ContractViolation("ThetaLayout: index out of range");
}

StructuralParams::StructuralParams(int num_products)
    : layout_(num_products), values_(Eigen::VectorXd::Zero(layout_.size())) {}

StructuralParams::StructuralParams(int num_products, Eigen::VectorXd values)
    : layout_(num_products), values_(std::move(values)) {
  if (values_.size() != layout_.size())
    throw ContractViolation("StructuralParams: dimension mismatch");
}

StructuralParams theta_projection(const SimulationPrimitives& prim) {
  const int J = prim.num_products;
  StructuralParams theta(J);
  theta.set_gamma(prim.gamma);
  const auto& b = prim.beta_sc;
  for (int k = 1; k <= J; ++k)
    for (int j = k + 1; j <= J; ++j)
      theta.set_beta_sc_tilde(k, j, b(k, j) + b(j, k) - b(k, k) - b(j, j));
  for (int j = 1; j <= J; ++j) theta.set_beta_dep(j, prim.dep(j));
  return theta;
}

double flow_utility(const SimulationPrimitives& prim, const ConsumerType& cons, int choice,
                    EndogenousState state, std::span<const double> prices) {
  const int J = prim.num_products;
  if (choice < 0 || choice > J) throw ContractViolation("flow_utility: choice out of range");
  if (state.last_brand < 1 || state.last_brand > J || state.duration < 1)
    throw ContractViolation("flow_utility: invalid state");
  if (static_cast<int>(prices.size()) != J)
    throw ContractViolation("flow_utility: price vector must have J entries");
  const int l = state.last_brand;
  if (choice == 0) {
    const int d = std::min(state.duration, prim.cap(l));
    return cons.alpha[l - 1] + prim.gamma * h_eval(prim.h_form, cons.mu) - prim.dep(l) * d;
  }
  const double p = prices[choice - 1];
  if (!(p > 0.0)) throw ContractViolation("flow_utility: prices must be positive");
  return cons.alpha[choice - 1] + prim.gamma * h_eval(prim.h_form, cons.mu - p) -
         prim.beta_sc(l, choice);
}

}  // namespace ffdc
