#pragma once

// Command pipelines behind the CLI: simulate, verify, estimate, detect-dstar.

#include "ffdc/config.hpp"
#include "ffdc/estimator.hpp"
#include "ffdc/panel.hpp"
#include "ffdc/stats_catalog.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ffdc {

struct SimulateOutput {
  PanelDataset data;
  std::vector<std::string> files;  // consumers.csv, panel.csv, manifest.json
};

/// Writes consumers.csv, panel.csv and manifest.json into out_dir (created if
/// needed). An empty out_dir skips writing.
SimulateOutput cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

struct CheckLine {
  std::string name;
  double lhs = 0.0, rhs = 0.0, tol = 0.0;
  bool passed = false;
};

struct VerifyOutput {
  std::vector<CheckLine> checks;
  std::string report;
  bool passed() const;
  int failures() const;
};

/// Sufficiency check, every catalog log-odds identity and the duration
/// profile, all against the oracle.
VerifyOutput cmd_verify(const RunConfig& cfg);

/// Dataset named by the config's estimate block, or by explicit paths.
PanelDataset load_dataset(const RunConfig& cfg, const std::string& consumers_path = "",
                          const std::string& panel_path = "");

struct DetectOutput {
  std::vector<DurationCapReport> reports;
  std::string report;
  nlohmann::json to_json() const;
};

DetectOutput cmd_detect_dstar(const RunConfig& cfg, const PanelDataset& data);
/// Oracle profile for the first population type on a panel long enough to
/// reveal every cap (T = 2 max d* + 2).
DetectOutput cmd_detect_dstar_oracle(const RunConfig& cfg);

struct EstimateOutput {
  EstimationResult result;
  std::vector<int> d_star_used;
  std::string d_star_source;  // "model", "config" or "detected"
  std::vector<DurationCapReport> detection;
  nlohmann::json to_json() const;
  std::string table() const;
};

EstimateOutput cmd_estimate(const RunConfig& cfg, const PanelDataset& data);

}  // namespace ffdc
