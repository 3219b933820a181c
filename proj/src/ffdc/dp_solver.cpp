#include "ffdc/dp_solver.hpp"

#include "ffdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace ffdc {

ValueFunctions::ValueFunctions(int num_products, int duration_cap, const PriceProcess& proc)
    : J_(num_products), D_(duration_cap), Z_(proc.num_z()) {
  e_count_.resize(Z_);
  e_offset_.resize(Z_);
  for (int z = 0; z < Z_; ++z) {
    e_offset_[z] = e_total_;
    e_count_[z] = static_cast<int>(proc.integration_points(z).size());
    e_total_ += e_count_[z];
  }
  v_.assign(static_cast<size_t>(J_) * D_ * Z_, 0.0);
  sigma_.assign(sigma_size(), 0.0);
  ccp_.assign(sigma_size() * (J_ + 1), 0.0);
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> choice_values(const SimulationPrimitives& prim, const ConsumerType& cons,
                                  const PriceProcess& proc, const ValueFunctions& vf,
                                  EndogenousState state, int z, std::span<const double> e) {
  const int J = prim.num_products;
  const int D = vf.duration_cap();
  const auto prices = proc.prices(z, e);
  std::vector<double> values(J + 1);
  for (int y = 0; y <= J; ++y) {
    const auto next = transition(y, state, J, D);
    values[y] = flow_utility(prim, cons, y, state, prices) + vf.v(next.last_brand, next.duration, z);
  }
  return values;
}

namespace {

// Flow utilities do not depend on v; tabulate them once per solve.
struct FlowTable {
  int J = 0, D = 0;
  std::vector<double> u;  // [sigma index][y]

  FlowTable(const SimulationPrimitives& prim, const ConsumerType& cons, const PriceProcess& proc,
            const ValueFunctions& shape)
      : J(prim.num_products), D(shape.duration_cap()) {
    u.resize(shape.sigma_size() * (J + 1));
    for (int z = 0; z < shape.num_z(); ++z) {
      const auto& pts = proc.integration_points(z);
      for (int ei = 0; ei < shape.num_e(z); ++ei) {
        const auto prices = proc.prices(z, pts[ei].e);
        for (int l = 1; l <= J; ++l)
          for (int d = 1; d <= D; ++d) {
            const size_t base = shape.s_index(l, d, z, ei) * (J + 1);
            for (int y = 0; y <= J; ++y)
              u[base + y] = flow_utility(prim, cons, y, {l, d}, prices);
          }
      }
    }
  }
};

void apply_bellman(const SimulationPrimitives& prim, const ConsumerType& cons,
                   const PriceProcess& proc, const FlowTable& flows, const ValueFunctions& in,
                   ValueFunctions& out, bool fill_ccp) {
  const int J = prim.num_products;
  const int D = in.duration_cap();
  const int Z = in.num_z();
  std::vector<double> values(J + 1);

  for (int z = 0; z < Z; ++z)
    for (int ei = 0; ei < in.num_e(z); ++ei)
      for (int l = 1; l <= J; ++l)
        for (int d = 1; d <= D; ++d) {
          const size_t si = in.s_index(l, d, z, ei);
          const double* u = flows.u.data() + si * (J + 1);
          values[0] = u[0] + in.v(l, std::min(d + 1, D), z);
          for (int j = 1; j <= J; ++j) values[j] = u[j] + in.v(j, 1, z);
          const double s = log_sum_exp(values);
          out.sigma_table()[si] = s;
          if (fill_ccp) {
            double* row = out.ccp_table().data() + si * (J + 1);
            for (int y = 0; y <= J; ++y) row[y] = std::exp(values[y] - s);
          }
        }

  // v(x', z) = delta * sum_{z'} F(z'|z) sum_{e'} Pr(e'|z') sigma(x', z', e')
  for (int l = 1; l <= J; ++l)
    for (int d = 1; d <= D; ++d) {
      std::vector<double> expected(Z, 0.0);
      for (int zn = 0; zn < Z; ++zn) {
        const auto& pts = proc.integration_points(zn);
        double acc = 0.0;
        for (int ei = 0; ei < out.num_e(zn); ++ei) acc += pts[ei].prob * out.sigma(l, d, zn, ei);
        expected[zn] = acc;
      }
      for (int z = 0; z < Z; ++z) {
        double acc = 0.0;
        for (int zn = 0; zn < Z; ++zn) acc += proc.z_transition(z, zn) * expected[zn];
        out.v_table()[out.v_index(l, d, z)] = cons.delta * acc;
      }
    }
}

void check_domain(const SimulationPrimitives& prim, const ConsumerType& cons,
                  const PriceProcess& proc) {
  if (proc.num_products != prim.num_products)
    throw ValidationError("price process and model disagree on the number of products");
  if (!(cons.delta >= 0.0 && cons.delta < 1.0))
    throw ContractViolation("solve: discount factor must lie in [0,1)");
  if (static_cast<int>(cons.alpha.size()) != prim.num_products)
    throw ContractViolation("solve: alpha must have J entries");
}

}  // namespace

void bellman_update(const SimulationPrimitives& prim, const ConsumerType& cons,
                    const PriceProcess& proc, const ValueFunctions& in, ValueFunctions& out) {
  check_domain(prim, cons, proc);
  for (double v : in.v_table())
    if (!std::isfinite(v)) throw ContractViolation("bellman_update: v_in must be finite");
  const FlowTable flows(prim, cons, proc, in);
  apply_bellman(prim, cons, proc, flows, in, out, false);
}

ValueFunctions solve(const SimulationPrimitives& prim, const ConsumerType& cons,
                     const PriceProcess& proc, const SolveOptions& options) {
  check_domain(prim, cons, proc);
  if (!(options.tol > 0.0)) throw ContractViolation("solve: tol must be positive");
  const int D = prim.duration_cap();
  const FlowTable flows(prim, cons, proc, ValueFunctions(prim.num_products, D, proc));

  ValueFunctions current(prim.num_products, D, proc);
  ValueFunctions next = current;
  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (iter < options.max_iter) {
    apply_bellman(prim, cons, proc, flows, current, next, false);
    ++iter;
    residual = 0.0;
    for (size_t i = 0; i < next.v_table().size(); ++i)
      residual = std::max(residual, std::abs(next.v_table()[i] - current.v_table()[i]));
    next.residual_history = std::move(current.residual_history);
    next.residual_history.push_back(residual);
    std::swap(current, next);
    if (residual < options.tol) break;
  }
  if (!(residual < options.tol)) {
    std::ostringstream msg;
    msg << "value iteration did not converge in " << iter << " iterations (residual "
        << residual << ")";
    throw NonConvergenceError(msg.str(), residual, iter);
  }
  // sigma and ccp consistent with the stored v
  ValueFunctions result = current;
  apply_bellman(prim, cons, proc, flows, current, result, true);
  result.v_table() = current.v_table();
  result.iterations = iter;
  result.residual = residual;
  result.residual_history = current.residual_history;
  return result;
}

ConsumerSolution::ConsumerSolution(SimulationPrimitives prim, ConsumerType cons,
                                   PriceProcess proc, const SolveOptions& options)
    : prim_(std::move(prim)), cons_(std::move(cons)), proc_(std::move(proc)) {
  vf_ = solve(prim_, cons_, proc_, options);
}

std::vector<double> ConsumerSolution::choice_probabilities(EndogenousState state, int z,
                                                           std::span<const double> e) const {
  auto values = choice_values(prim_, cons_, proc_, vf_, state, z, e);
  const double s = log_sum_exp(values);
  for (auto& v : values) v = std::exp(v - s);
  return values;
}

double ConsumerSolution::log_ccp(int choice, EndogenousState state, int z,
                                 std::span<const double> e) const {
  const auto values = choice_values(prim_, cons_, proc_, vf_, state, z, e);
  return values[choice] - log_sum_exp(values);
}

void write_value_functions(const ValueFunctions& vf, std::ostream& out) {
  char buf[64];
  out << "# table l d z e value\n";
  const int J = vf.num_products(), D = vf.duration_cap();
  for (int l = 1; l <= J; ++l)
    for (int d = 1; d <= D; ++d)
      for (int z = 0; z < vf.num_z(); ++z) {
        std::snprintf(buf, sizeof buf, "%a", vf.v(l, d, z));
        out << "v " << l << ' ' << d << ' ' << z << " - " << buf << '\n';
      }
  for (int l = 1; l <= J; ++l)
    for (int d = 1; d <= D; ++d)
      for (int z = 0; z < vf.num_z(); ++z)
        for (int e = 0; e < vf.num_e(z); ++e) {
          std::snprintf(buf, sizeof buf, "%a", vf.sigma(l, d, z, e));
          out << "sigma " << l << ' ' << d << ' ' << z << ' ' << e << ' ' << buf << '\n';
        }
  for (int l = 1; l <= J; ++l)
    for (int d = 1; d <= D; ++d)
      for (int z = 0; z < vf.num_z(); ++z)
        for (int e = 0; e < vf.num_e(z); ++e) {
          const auto row = vf.ccp(l, d, z, e);
          for (int y = 0; y <= J; ++y) {
            std::snprintf(buf, sizeof buf, "%a", row[y]);
            out << "ccp" << y << ' ' << l << ' ' << d << ' ' << z << ' ' << e << ' ' << buf
                << '\n';
          }
        }
}

}  // namespace ffdc
