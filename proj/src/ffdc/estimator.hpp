#pragma once

// Conditional maximum likelihood over matched history pairs. Every match is a
// binary logit between the pair's two histories with index (c(A) - c(B))'theta.
// Nothing here depends on consumer types, discount factors or value functions.

#include "ffdc/model.hpp"
#include "ffdc/panel.hpp"
#include "ffdc/stats_catalog.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace ffdc {

struct EstimationOptions {
  MatchMode mode = MatchMode::exact;
  KernelKind kernel = KernelKind::gaussian_product;
  /// Fixed bandwidth; <= 0 selects the rule b_c = constant * sd(r_c) * n^(-1/5)
  /// per residual component, n the number of candidate windows of the pair.
  double bandwidth = 0.0;
  double bandwidth_constant = 1.0;
  double tol = 1e-8;
  int max_steps = 100;
  Eigen::VectorXd theta0;  // empty: zeros
  HForm h_form = HForm::linear;
};

/// One weighted binary observation.
struct PairObservation {
  int consumer = 0;
  int spec = 0;    // index into PairCatalog::specs
  int start = 0;   // window start (0-based period)
  bool chose_a = false;
  double weight = 0.0;
  Eigen::VectorXd gap;  // c(A) - c(B) on the window's own prices
};

struct PairTally {
  int spec = 0;
  std::string label;
  long count_a = 0, count_b = 0;
  double weight_a = 0.0, weight_b = 0.0;
  std::vector<double> bandwidth;  // kernel mode
};

struct MatchSet {
  int dimension = 0;
  std::vector<PairObservation> obs;
  std::vector<PairTally> tallies;
  double total_weight() const;
};

/// Scans every consumer's consecutive sub-windows against every estimable
/// spec. Observations with zero weight are dropped.
MatchSet compile_matches(const PanelDataset& data, const PairCatalog& catalog,
                         const EstimationOptions& options);

double conditional_loglik(const Eigen::VectorXd& theta, const MatchSet& matches);

struct ScoreHessian {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

ScoreHessian score_and_hessian(const Eigen::VectorXd& theta, const MatchSet& matches);

/// Per-consumer score contributions (rows follow first appearance).
Eigen::MatrixXd consumer_scores(const Eigen::VectorXd& theta, const MatchSet& matches);

/// Throws IdentificationError naming components with no loading, or the
/// components of a collinear combination.
void check_identification(const MatchSet& matches, const ThetaLayout& layout);

struct NewtonStep {
  int iteration = 0;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  double step_size = 0.0;
};

struct EstimationResult {
  StructuralParams theta_hat{2};
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  double loglik = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<NewtonStep> log;
  std::vector<PairTally> tallies;
  long num_observations = 0;
  MatchMode mode = MatchMode::exact;
  KernelKind kernel = KernelKind::gaussian_product;
};

EstimationResult fit(const MatchSet& matches, const ThetaLayout& layout,
                     const EstimationOptions& options);
EstimationResult fit(const PanelDataset& data, const PairCatalog& catalog,
                     const EstimationOptions& options);

nlohmann::json to_json(const EstimationResult& result);
/// theta_hat +- s.e. table.
std::string format_table(const EstimationResult& result);

}  // namespace ffdc
