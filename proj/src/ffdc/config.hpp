#pragma once

// Run configuration: one JSON document, every key checked, unknown keys
// rejected with the full path of the offending field.

#include "ffdc/estimator.hpp"
#include "ffdc/model.hpp"
#include "ffdc/price_process.hpp"
#include "ffdc/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ffdc {

struct SimulateBlock {
  int num_consumers = 1000;
  int num_periods = 4;
  std::uint64_t seed = 1;
  PricePathMode price_paths = PricePathMode::per_consumer;
  int threads = 1;
};

struct EstimateBlock {
  EstimationOptions options;
  std::vector<PairKind> kinds{PairKind::no_duration_adjacent, PairKind::no_duration_gapped,
                              PairKind::duration};
  bool detect_d_star = false;
  std::vector<int> d_star;  // empty: model.d_star
  std::string consumers_path, panel_path;
  double detect_num_se = 3.0;
};

struct VerifyBlock {
  double tol = 1e-8;
  double sufficiency_tol = 1e-10;
  long max_enumeration = 1000000;
  int num_periods = 4;
  double corrupt_beta_sc_tilde = 0.0;
};

struct RunConfig {
  std::string source;    // file path, empty for inline text
  std::string base_dir;  // relative paths resolve against this
  std::uint64_t hash = 0;

  SimulationPrimitives model;
  std::vector<ConsumerType> population;
  std::optional<PriceProcess> prices;
  std::string prices_ref;
  SimulateBlock simulate;
  EstimateBlock estimate;
  VerifyBlock verify;
  SolveOptions solve;

  const PriceProcess& price_process() const;
};

RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace ffdc
