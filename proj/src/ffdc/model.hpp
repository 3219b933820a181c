#pragma once

// Structural primitives of the fixed-effects dynamic demand model: state
// transition, per-period utility and the identified parameter vector.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace ffdc {

enum class HForm { linear, logarithmic };

HForm parse_h_form(const std::string& name);
std::string to_string(HForm form);

/// Utility of composite-good consumption. Throws DomainError for log of c <= 0.
double h_eval(HForm form, double c);

/// Endogenous state x = (last purchased brand, duration since that purchase).
struct EndogenousState {
  int last_brand = 1;  // 1..J
  int duration = 1;    // 1..D

  friend bool operator==(const EndogenousState&, const EndogenousState&) = default;
};

/// Next state after choice y (0 = no purchase). Duration saturates at the cap.
EndogenousState transition(int choice, EndogenousState state, int num_products,
                           int duration_cap);

/// Initial condition plus the choices y_1..y_T.
struct ChoiceHistory {
  EndogenousState initial;
  std::vector<int> choices;

  int length() const { return static_cast<int>(choices.size()); }
  friend bool operator==(const ChoiceHistory&, const ChoiceHistory&) = default;
};

/// Full structural primitives used to generate data.
struct SimulationPrimitives {
  int num_products = 2;
  double gamma = 0.0;
  /// (J+1)x(J+1), entry (k, j) is the cost of switching from brand k to j.
  /// Row and column 0 stand for "no purchase" and stay zero.
  Eigen::MatrixXd beta_sc;
  std::vector<double> beta_dep;  // per brand, index j-1
  std::vector<int> d_star;       // per brand, index j-1
  HForm h_form = HForm::linear;

  /// Duration state space cap D = max_j d*_j.
  int duration_cap() const;
  double dep(int brand) const { return beta_dep[brand - 1]; }
  int cap(int brand) const { return d_star[brand - 1]; }
  /// Throws ValidationError naming the offending field.
  void validate() const;

  static SimulationPrimitives zeros(int num_products);
};

struct InitialCell {
  EndogenousState state;
  double prob = 0.0;
};

/// One point of support of the fixed-effect distribution.
struct ConsumerType {
  std::vector<double> alpha;  // index j-1
  double delta = 0.0;
  double mu = 1.0;
  std::vector<InitialCell> initial_dist;
  double weight = 1.0;

  double probability_of_initial(EndogenousState s) const;
  void validate(int num_products, int duration_cap) const;
};

/// Checks every type and that the weights sum to one.
void validate_population(const std::vector<ConsumerType>& population, int num_products,
                         int duration_cap);

/// Layout of theta = (gamma, beta_sc_tilde(k,j) for k<j, beta_dep(j)).
class ThetaLayout {
 public:
  explicit ThetaLayout(int num_products);

  int num_products() const { return num_products_; }
  int size() const { return 1 + num_products_ * (num_products_ - 1) / 2 + num_products_; }
  static constexpr int gamma_index() { return 0; }
  /// Index of the unordered pair {k, j}, k != j.
  int pair_index(int k, int j) const;
  int dep_index(int brand) const;
  std::string name(int index) const;

 private:
  int num_products_;
};

/// Identified structural parameters theta.
class StructuralParams {
 public:
  explicit StructuralParams(int num_products);
  StructuralParams(int num_products, Eigen::VectorXd values);

  const ThetaLayout& layout() const { return layout_; }
  int dimension() const { return layout_.size(); }
  int num_products() const { return layout_.num_products(); }

  double gamma() const { return values_[0]; }
  double beta_sc_tilde(int k, int j) const { return values_[layout_.pair_index(k, j)]; }
  double beta_dep(int brand) const { return values_[layout_.dep_index(brand)]; }

  void set_gamma(double g) { values_[0] = g; }
  void set_beta_sc_tilde(int k, int j, double v) { values_[layout_.pair_index(k, j)] = v; }
  void set_beta_dep(int brand, double v) { values_[layout_.dep_index(brand)] = v; }

  const Eigen::VectorXd& values() const { return values_; }

 private:
  ThetaLayout layout_;
  Eigen::VectorXd values_;
};

/// beta_sc_tilde(k,j) = b(k,j) + b(j,k) - b(k,k) - b(j,j); gamma and beta_dep copied.
StructuralParams theta_projection(const SimulationPrimitives& prim);

/// Deterministic part of period utility (logit shock excluded).
/// y=0: alpha(l) + gamma h(mu) - beta_dep(l) min(d, d*_l)
/// y=j: alpha(j) + gamma h(mu - p(j)) - beta_sc(l, j)
double flow_utility(const SimulationPrimitives& prim, const ConsumerType& cons, int choice,
                    EndogenousState state, std::span<const double> prices);

}  // namespace ffdc
