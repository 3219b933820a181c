// Command-line front end. Talks to the library only through the C API.

#include "ffdc/ffdc.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

int exit_code(ffdc_status s) {
  switch (s) {
    case FFDC_OK: return 0;
    case FFDC_ERR_VERIFICATION: return 2;
    case FFDC_ERR_NONCONVERGENCE: return 3;
    default: return 1;
  }
}

int report_failure(ffdc_status s) {
  std::cerr << "error (" << ffdc_status_name(s) << "): " << ffdc_last_error() << "\n";
  return exit_code(s);
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s; c.seed_set = true; },
      "random seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

// Loads the config and applies command-line overrides.
ffdc_status open_config(const Common& c, ffdc_config** cfg) {
  ffdc_status s = ffdc_config_load(c.config.c_str(), cfg);
  if (s != FFDC_OK) return s;
  if (c.seed_set) ffdc_config_set_seed(*cfg, c.seed);
  if (c.threads > 0) ffdc_config_set_threads(*cfg, c.threads);
  return FFDC_OK;
}

std::string out_path(const Common& c, const std::string& name) {
  const std::string dir = c.out.empty() ? "." : c.out;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

bool write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!(f << text)) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  return !ec;
}

// Dataset from --data DIR, else from the config's estimate block.
ffdc_status open_dataset(const ffdc_config* cfg, const std::string& data_dir, ffdc_dataset** out) {
  if (data_dir.empty()) return ffdc_dataset_from_config(cfg, out);
  const auto dir = std::filesystem::path(data_dir);
  return ffdc_dataset_load((dir / "consumers.csv").string().c_str(),
                           (dir / "panel.csv").string().c_str(), out);
}

int run_simulate(const Common& c) {
  ffdc_config* cfg = nullptr;
  ffdc_status s = open_config(c, &cfg);
  if (s != FFDC_OK) return report_failure(s);
  const std::string dir = c.out.empty() ? "." : c.out;
  ffdc_dataset* data = nullptr;
  s = ffdc_simulate(cfg, dir.c_str(), &data);
  if (s == FFDC_OK)
    std::cout << "simulated " << ffdc_dataset_num_consumers(data) << " consumers x "
              << ffdc_dataset_num_periods(data) << " periods -> " << dir << "\n";
  ffdc_dataset_free(data);
  ffdc_config_free(cfg);
  return s == FFDC_OK ? 0 : report_failure(s);
}

int run_verify(const Common& c) {
  ffdc_config* cfg = nullptr;
  ffdc_status s = open_config(c, &cfg);
  if (s != FFDC_OK) return report_failure(s);
  ffdc_report* rep = nullptr;
  s = ffdc_verify(cfg, &rep);
  if (rep) {
    std::cout << ffdc_report_text(rep);
    if (!c.out.empty()) write_text(out_path(c, "verify.json"), ffdc_report_json(rep));
  }
  ffdc_report_free(rep);
  ffdc_config_free(cfg);
  return s == FFDC_OK ? 0 : report_failure(s);
}

int run_estimate(const Common& c, const std::string& data_dir) {
  ffdc_config* cfg = nullptr;
  ffdc_status s = open_config(c, &cfg);
  if (s != FFDC_OK) return report_failure(s);
  ffdc_dataset* data = nullptr;
  ffdc_estimate* est = nullptr;
  s = open_dataset(cfg, data_dir, &data);
  if (s == FFDC_OK) s = ffdc_estimate_run(cfg, data, &est);
  if (s == FFDC_OK) {
    std::cout << ffdc_estimate_table(est);
    const std::string path = out_path(c, "estimate.json");
    s = ffdc_estimate_write(est, path.c_str());
    if (s == FFDC_OK) std::cout << "wrote " << path << "\n";
  }
  ffdc_estimate_free(est);
  ffdc_dataset_free(data);
  ffdc_config_free(cfg);
  return s == FFDC_OK ? 0 : report_failure(s);
}

int run_detect(const Common& c, const std::string& data_dir, bool oracle) {
  ffdc_config* cfg = nullptr;
  ffdc_status s = open_config(c, &cfg);
  if (s != FFDC_OK) return report_failure(s);
  ffdc_dataset* data = nullptr;
  ffdc_report* rep = nullptr;
  if (!oracle) s = open_dataset(cfg, data_dir, &data);
  if (s == FFDC_OK) s = ffdc_detect_dstar(cfg, data, &rep);
  if (s == FFDC_OK) {
    std::cout << (oracle ? "# exact profile from the model\n" : "# empirical profile\n")
              << ffdc_report_text(rep);
    if (!c.out.empty()) write_text(out_path(c, "dstar.json"), ffdc_report_json(rep));
  }
  ffdc_report_free(rep);
  ffdc_dataset_free(data);
  ffdc_config_free(cfg);
  return s == FFDC_OK ? 0 : report_failure(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-effects dynamic demand: simulate, verify, estimate, detect duration caps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ffdc_version());

  Common sim_opts, ver_opts, est_opts, det_opts;
  std::string est_data, det_data;
  bool det_oracle = false;

  auto* sim = app.add_subcommand("simulate", "simulate a panel and write consumers.csv, panel.csv, manifest.json");
  add_common(sim, sim_opts);
  auto* ver = app.add_subcommand("verify", "check every identification identity against the exact model");
  add_common(ver, ver_opts);
  auto* est = app.add_subcommand("estimate", "conditional maximum likelihood on a panel");
  add_common(est, est_opts);
  est->add_option("--data", est_data, "directory holding consumers.csv and panel.csv");
  auto* det = app.add_subcommand("detect-dstar", "duration-cap profile per product");
  add_common(det, det_opts);
  det->add_option("--data", det_data, "directory holding consumers.csv and panel.csv");
  det->add_flag("--oracle", det_oracle, "exact profile from the configured model instead of data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return run_simulate(sim_opts);
    if (*ver) return run_verify(ver_opts);
    if (*est) return run_estimate(est_opts, est_data);
    if (*det) return run_detect(det_opts, det_data, det_oracle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
