#pragma once

// Exact value iteration for one consumer type: integrated values sigma,
// continuation values v (no e dimension) and logit CCPs.

#include "ffdc/model.hpp"
#include "ffdc/price_process.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace ffdc {

/// Tables over the state space (l, d, z[, e]) of one consumer type. The e
/// index runs over PriceProcess::integration_points(z).
class ValueFunctions {
 public:
  ValueFunctions() = default;
  ValueFunctions(int num_products, int duration_cap, const PriceProcess& proc);

  int num_products() const { return J_; }
  int duration_cap() const { return D_; }
  int num_z() const { return Z_; }
  int num_e(int z) const { return e_count_[z]; }

  double v(int l, int d, int z) const { return v_[v_index(l, d, z)]; }
  double sigma(int l, int d, int z, int e) const { return sigma_[s_index(l, d, z, e)]; }
  std::span<const double> ccp(int l, int d, int z, int e) const {
    return {ccp_.data() + s_index(l, d, z, e) * (J_ + 1), static_cast<size_t>(J_ + 1)};
  }

  std::vector<double>& v_table() { return v_; }
  const std::vector<double>& v_table() const { return v_; }
  std::vector<double>& sigma_table() { return sigma_; }
  const std::vector<double>& sigma_table() const { return sigma_; }
  std::vector<double>& ccp_table() { return ccp_; }

  size_t v_index(int l, int d, int z) const {
    return (static_cast<size_t>(l - 1) * D_ + (d - 1)) * Z_ + z;
  }
  size_t s_index(int l, int d, int z, int e) const {
    return (static_cast<size_t>(l - 1) * D_ + (d - 1)) * e_total_ + e_offset_[z] + e;
  }
  size_t sigma_size() const { return static_cast<size_t>(J_) * D_ * e_total_; }

  // convergence record
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;

 private:
  int J_ = 0, D_ = 0, Z_ = 0, e_total_ = 0;
  std::vector<int> e_count_, e_offset_;
  std::vector<double> v_, sigma_, ccp_;
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// u(y, x, p) + v(f_x(y, x), z) for y = 0..J, given continuation values.
std::vector<double> choice_values(const SimulationPrimitives& prim, const ConsumerType& cons,
                                  const PriceProcess& proc, const ValueFunctions& vf,
                                  EndogenousState state, int z, std::span<const double> e);

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

/// One application of the Bellman operator. Reads vf.v_table(), returns the
/// new sigma and v tables in `out` (whose shape must match).
void bellman_update(const SimulationPrimitives& prim, const ConsumerType& cons,
                    const PriceProcess& proc, const ValueFunctions& in, ValueFunctions& out);

/// Fixed point of bellman_update; fills v, sigma and ccp. Throws
/// NonConvergenceError carrying the last residual.
ValueFunctions solve(const SimulationPrimitives& prim, const ConsumerType& cons,
                     const PriceProcess& proc, const SolveOptions& options = {});

/// Solved problem of one consumer type, bundled with its inputs.
class ConsumerSolution {
 public:
  ConsumerSolution(SimulationPrimitives prim, ConsumerType cons, PriceProcess proc,
                   const SolveOptions& options = {});

  const SimulationPrimitives& primitives() const { return prim_; }
  const ConsumerType& consumer() const { return cons_; }
  const PriceProcess& process() const { return proc_; }
  const ValueFunctions& values() const { return vf_; }

  /// CCP at an arbitrary transitory draw (tables cover integration points only).
  std::vector<double> choice_probabilities(EndogenousState state, int z,
                                           std::span<const double> e) const;
  /// log P(y | x, z, e).
  double log_ccp(int choice, EndogenousState state, int z, std::span<const double> e) const;

 private:
  SimulationPrimitives prim_;
  ConsumerType cons_;
  PriceProcess proc_;
  ValueFunctions vf_;
};

/// Columnar text dump "table l d z e value" for debugging and golden files.
/// Values are written in hexadecimal floating point so they round-trip exactly.
void write_value_functions(const ValueFunctions& vf, std::ostream& out);

}  // namespace ffdc
