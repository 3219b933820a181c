#include "ffdc/estimator.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace ffdc {

namespace {

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Candidate {
  int consumer, start;
  bool chose_a;
  std::vector<double> residual;
  Eigen::VectorXd gap;
};

}  // namespace

double MatchSet::total_weight() const {
  double w = 0.0;
  for (const auto& o : obs) w += o.weight;
  return w;
}

MatchSet compile_matches(const PanelDataset& data, const PairCatalog& catalog,
                         const EstimationOptions& options) {
  if (data.num_products() != catalog.num_products)
    throw ValidationError("dataset and pair catalog disagree on the number of products");
  const auto specs = catalog.estimable();
  if (specs.empty())
    throw ValidationError("no feasible pairs for T=" + std::to_string(data.num_periods()) +
                          " (no-duration pairs need T >= 4, duration pairs T >= 2 d* + 2)");
  if (options.mode == MatchMode::kernel && options.bandwidth <= 0.0 &&
      !(options.bandwidth_constant > 0.0))
    throw ValidationError("estimate.bandwidth constant must be positive");

  const ThetaLayout layout(catalog.num_products);
  const int D = *std::max_element(catalog.d_star.begin(), catalog.d_star.end());
  MatchSet out;
  out.dimension = layout.size();

  std::vector<std::vector<EndogenousState>> states(data.num_consumers());
  for (int i = 0; i < data.num_consumers(); ++i) states[i] = data.states(i, D);

  for (const HistoryPairSpec* spec : specs) {
    const int L = spec->length();
    const auto starts = window_starts(data.num_periods(), L);
    std::vector<Candidate> cands;
    for (int i = 0; i < data.num_consumers(); ++i) {
      const auto y = data.choices(i);
      const auto prices = data.prices(i);
      for (int start : starts) {
        const int cls = classify_history(*spec, y.subspan(start, L));
        if (cls == 0) continue;
        const auto pw = prices.window(start, L);
        auto r = price_restriction_residual(*spec, pw);
        if (options.mode == MatchMode::exact &&
            !std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; }))
          continue;
        ChoiceHistory a{states[i][start], spec->a.choices};
        ChoiceHistory b{states[i][start], spec->b.choices};
        Eigen::VectorXd gap =
            identifying_vector(a, pw, data.mu(i), options.h_form, catalog.d_star) -
            identifying_vector(b, pw, data.mu(i), options.h_form, catalog.d_star);
        cands.push_back({i, start, cls > 0, std::move(r), std::move(gap)});
      }
    }

    PairTally tally;
    tally.spec = spec->id;
    tally.label = spec->label();
    if (options.mode == MatchMode::kernel && !cands.empty()) {
      const size_t R = cands.front().residual.size();
      tally.bandwidth.assign(R, options.bandwidth);
      if (options.bandwidth <= 0.0) {
        const double n = static_cast<double>(cands.size());
        for (size_t c = 0; c < R; ++c) {
          double mean = 0.0, sq = 0.0;
          for (const auto& cd : cands) mean += cd.residual[c];
          mean /= n;
          for (const auto& cd : cands) sq += (cd.residual[c] - mean) * (cd.residual[c] - mean);
          const double sd = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
          // a component that never moves gets weight K(0) whatever b is
          tally.bandwidth[c] = sd > 0.0 ? options.bandwidth_constant * sd * std::pow(n, -0.2) : 1.0;
        }
      }
    }
    for (auto& cd : cands) {
      const double w = options.mode == MatchMode::exact
                           ? 1.0
                           : kernel_weight(cd.residual, options.kernel, tally.bandwidth);
      if (w <= 0.0) continue;
      (cd.chose_a ? tally.count_a : tally.count_b) += 1;
      (cd.chose_a ? tally.weight_a : tally.weight_b) += w;
      out.obs.push_back({cd.consumer, spec->id, cd.start, cd.chose_a, w, std::move(cd.gap)});
    }
    out.tallies.push_back(std::move(tally));
  }
  return out;
}

double conditional_loglik(const Eigen::VectorXd& theta, const MatchSet& matches) {
  if (theta.size() != matches.dimension)
    throw ContractViolation("conditional_loglik: theta has the wrong dimension");
  double ll = 0.0;
  for (const auto& o : matches.obs) {
    const double q = o.gap.dot(theta);
    ll -= o.weight * (o.chose_a ? softplus(-q) : softplus(q));
  }
  return ll;
}

ScoreHessian score_and_hessian(const Eigen::VectorXd& theta, const MatchSet& matches) {
  if (theta.size() != matches.dimension)
    throw ContractViolation("score_and_hessian: theta has the wrong dimension");
  const int K = matches.dimension;
  ScoreHessian out;
  out.gradient = Eigen::VectorXd::Zero(K);
  out.hessian = Eigen::MatrixXd::Zero(K, K);
  for (const auto& o : matches.obs) {
    const double q = o.gap.dot(theta);
    const double lam = logistic(q);
    out.loglik -= o.weight * (o.chose_a ? softplus(-q) : softplus(q));
    out.gradient.noalias() += o.weight * ((o.chose_a ? 1.0 : 0.0) - lam) * o.gap;
    out.hessian.noalias() -= o.weight * lam * (1.0 - lam) * (o.gap * o.gap.transpose());
  }
  return out;
}

Eigen::MatrixXd consumer_scores(const Eigen::VectorXd& theta, const MatchSet& matches) {
  std::map<int, int> row_of;
  for (const auto& o : matches.obs) row_of.emplace(o.consumer, static_cast<int>(row_of.size()));
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(row_of.size(), matches.dimension);
  for (const auto& o : matches.obs) {
    const double lam = logistic(o.gap.dot(theta));
    scores.row(row_of[o.consumer]) += o.weight * ((o.chose_a ? 1.0 : 0.0) - lam) * o.gap.transpose();
  }
  return scores;
}

void check_identification(const MatchSet& matches, const ThetaLayout& layout) {
  const int K = layout.size();
  if (matches.obs.empty() || !(matches.total_weight() > 0.0)) {
    std::string names;
    for (int k = 0; k < K; ++k) names += (k ? ", " : "") + layout.name(k);
    throw IdentificationError("no identifying observations; starved components: " + names);
  }
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(K, K);
  for (const auto& o : matches.obs) info.noalias() += o.weight * (o.gap * o.gap.transpose());

  std::vector<std::string> starved;
  for (int k = 0; k < K; ++k)
    if (info(k, k) == 0.0) starved.push_back(layout.name(k));
  if (!starved.empty()) {
    std::string msg = "unidentified component";
    msg += starved.size() > 1 ? "s: " : ": ";
    for (size_t i = 0; i < starved.size(); ++i) msg += (i ? ", " : "") + starved[i];
    msg += " (no matched pair loads on it)";
    throw IdentificationError(msg);
  }
  // scale-free rank check on the correlation form
  const Eigen::VectorXd d = info.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = d.asDiagonal() * info * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.eigenvalues()[0] < 1e-10) {
    const Eigen::VectorXd null = eig.eigenvectors().col(0);
    std::string msg = "collinear identifying statistics among: ";
    bool first = true;
    for (int k = 0; k < K; ++k)
      if (std::abs(null[k]) > 1e-6) {
        msg += (first ? "" : ", ") + layout.name(k);
        first = false;
      }
    throw IdentificationError(msg);
  }
}

EstimationResult fit(const MatchSet& matches, const ThetaLayout& layout,
                     const EstimationOptions& options) {
  if (!(options.tol > 0.0)) throw ContractViolation("fit: tol must be positive");
  if (matches.dimension != layout.size()) throw ContractViolation("fit: dimension mismatch");
  check_identification(matches, layout);

  const int K = layout.size();
  Eigen::VectorXd theta = options.theta0.size() == K ? options.theta0 : Eigen::VectorXd::Zero(K);
  EstimationResult res;
  res.mode = options.mode;
  res.kernel = options.kernel;
  res.tallies = matches.tallies;
  res.num_observations = static_cast<long>(matches.obs.size());

  ScoreHessian sh = score_and_hessian(theta, matches);
  int it = 0;
  for (;; ++it) {
    const double gnorm = sup_norm(sh.gradient);
    res.log.push_back({it, sh.loglik, gnorm, it == 0 ? 0.0 : res.log.back().step_size});
    if (gnorm < options.tol) break;
    if (it >= options.max_steps) {
      std::ostringstream msg;
      msg << "Newton iterations did not converge in " << options.max_steps
          << " steps (gradient sup-norm " << gnorm << ")";
      throw NonConvergenceError(msg.str(), gnorm, it);
    }
    const Eigen::VectorXd dir = (-sh.hessian).ldlt().solve(sh.gradient);
    double t = 1.0;
    ScoreHessian next;
    for (;;) {
      next = score_and_hessian(theta + t * dir, matches);
      const double slack = 1e-12 * std::max(1.0, std::abs(sh.loglik));
      if (std::isfinite(next.loglik) && next.loglik >= sh.loglik - slack) break;
      t *= 0.5;
      if (t < 1e-12) {
        std::ostringstream msg;
        msg << "line search failed at step " << it << " (gradient sup-norm " << gnorm << ")";
        throw NonConvergenceError(msg.str(), gnorm, it);
      }
    }
    theta += t * dir;
    sh = std::move(next);
    res.log.back().step_size = t;
  }

  res.iterations = it;
  res.loglik = sh.loglik;
  res.gradient_norm = sup_norm(sh.gradient);
  res.theta_hat = StructuralParams(layout.num_products(), theta);

  const Eigen::MatrixXd a = -sh.hessian;
  const Eigen::MatrixXd scores = consumer_scores(theta, matches);
  const Eigen::MatrixXd b = scores.transpose() * scores;
  const Eigen::MatrixXd a_inv = a.ldlt().solve(Eigen::MatrixXd::Identity(K, K));
  Eigen::MatrixXd cov = a_inv * b * a_inv;
  res.covariance = 0.5 * (cov + cov.transpose());
  res.std_errors = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return res;
}

EstimationResult fit(const PanelDataset& data, const PairCatalog& catalog,
                     const EstimationOptions& options) {
  const MatchSet matches = compile_matches(data, catalog, options);
  return fit(matches, ThetaLayout(catalog.num_products), options);
}

nlohmann::json to_json(const EstimationResult& result) {
  using nlohmann::json;
  const auto& layout = result.theta_hat.layout();
  const int K = layout.size();
  json out;
  out["mode"] = to_string(result.mode);
  if (result.mode == MatchMode::kernel) out["kernel"] = to_string(result.kernel);
  json names = json::array(), theta = json::object(), se = json::object();
  for (int k = 0; k < K; ++k) {
    names.push_back(layout.name(k));
    theta[layout.name(k)] = result.theta_hat.values()[k];
    se[layout.name(k)] = result.std_errors[k];
  }
  out["components"] = names;
  out["theta_hat"] = theta;
  out["std_errors"] = se;
  json cov = json::array();
  for (int r = 0; r < K; ++r) {
    json row = json::array();
    for (int c = 0; c < K; ++c) row.push_back(result.covariance(r, c));
    cov.push_back(row);
  }
  out["covariance"] = cov;
  out["loglik"] = result.loglik;
  out["num_observations"] = result.num_observations;
  json pairs = json::array();
  for (const auto& t : result.tallies) {
    json p{{"id", t.spec},       {"pair", t.label},       {"count_a", t.count_a},
           {"count_b", t.count_b}, {"weight_a", t.weight_a}, {"weight_b", t.weight_b}};
    if (result.mode == MatchMode::kernel) p["bandwidth"] = t.bandwidth;
    pairs.push_back(p);
  }
  out["matches"] = pairs;
  json log = json::array();
  for (const auto& s : result.log)
    log.push_back({{"iteration", s.iteration},
                   {"loglik", s.loglik},
                   {"gradient_norm", s.gradient_norm},
                   {"step_size", s.step_size}});
  out["convergence"] = {
      {"iterations", result.iterations}, {"gradient_norm", result.gradient_norm}, {"log", log}};
  return out;
}

std::string format_table(const EstimationResult& result) {
  const auto& layout = result.theta_hat.layout();
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %14s %14s\n", "component", "estimate", "std.err");
  out += line;
  for (int k = 0; k < layout.size(); ++k) {
    std::snprintf(line, sizeof line, "%-22s %14.6f %14.6f\n", layout.name(k).c_str(),
                  result.theta_hat.values()[k], result.std_errors[k]);
    out += line;
  }
  std::snprintf(line, sizeof line, "loglik %.6f  matches %ld  newton steps %d  |grad| %.3g\n",
                result.loglik, result.num_observations, result.iterations, result.gradient_norm);
  out += line;
  return out;
}

}  // namespace ffdc
