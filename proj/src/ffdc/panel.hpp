#pragma once

// Consumer panel: per-consumer initial conditions and income, per-period
// choices and price components. CSV schema:
//
//   consumers.csv  id,mu,l1,d1
//   panel.csv      id,t,y,z_id,e_1..e_J,p_1..p_J   (t = 1..T, balanced)

#include "ffdc/model.hpp"
#include "ffdc/price_process.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ffdc {

class PanelDataset {
 public:
  PanelDataset() = default;
  PanelDataset(int num_products, int num_periods, int num_consumers);

  int num_products() const { return J_; }
  int num_periods() const { return T_; }
  int num_consumers() const { return static_cast<int>(ids_.size()); }

  int id(int i) const { return ids_[i]; }
  double mu(int i) const { return mu_[i]; }
  EndogenousState initial(int i) const { return initial_[i]; }
  std::span<const int> choices(int i) const { return {y_.data() + row(i, 0), size_t(T_)}; }
  PriceView prices(int i) const {
    return {J_, {z_.data() + row(i, 0), size_t(T_)},
            {e_.data() + row(i, 0) * J_, size_t(T_) * J_},
            {p_.data() + row(i, 0) * J_, size_t(T_) * J_}};
  }
  /// Data-generating type index, -1 when unknown (e.g. after CSV import).
  int true_type(int i) const { return type_[i]; }

  void set_consumer(int i, int id, double mu, EndogenousState initial, int type = -1);
  void set_period(int i, int t, int choice, int z, std::span<const double> e,
                  std::span<const double> p);

  /// (l_t, d_t) for t = 1..T+1 propagated by the transition rule with cap D.
  std::vector<EndogenousState> states(int i, int duration_cap) const;

  std::uint64_t seed = 0;
  std::string price_process_ref;

 private:
  size_t row(int i, int t) const { return static_cast<size_t>(i) * T_ + t; }

  int J_ = 0, T_ = 0;
  std::vector<int> ids_, type_;
  std::vector<double> mu_;
  std::vector<EndogenousState> initial_;
  std::vector<int> y_, z_;
  std::vector<double> e_, p_;
};

/// Shortest decimal that parses back to the same double.
std::string format_real(double x);

void write_panel_csv(const PanelDataset& data, const std::string& consumers_path,
                     const std::string& panel_path);
/// Throws ValidationError naming the file, line and column on schema errors.
PanelDataset read_panel_csv(const std::string& consumers_path, const std::string& panel_path);

/// Write via a temporary file and rename.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace ffdc
