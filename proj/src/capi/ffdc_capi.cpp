#include "ffdc/ffdc.h"

#include "ffdc/commands.hpp"
#include "ffdc/config.hpp"
#include "ffdc/dp_solver.hpp"
#include "ffdc/errors.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct ffdc_config {
  ffdc::RunConfig cfg;
};

struct ffdc_dataset {
  ffdc::PanelDataset data;
};

struct ffdc_report {
  bool passed = true;
  int checks = 0, failures = 0;
  std::string text, json;
  std::vector<int> caps;
};

struct ffdc_estimate {
  ffdc::EstimateOutput out;
  std::vector<std::string> names;
  std::string json, table;
};

struct ffdc_solution {
  std::unique_ptr<ffdc::ConsumerSolution> sol;
};

namespace {

thread_local std::string last_error;

ffdc_status set_error(ffdc_status status, const std::string& msg) {
  last_error = msg;
  return status;
}

// Runs f, mapping library exceptions onto status codes.
template <class F>
ffdc_status guarded(F&& f) {
  try {
    return f();
  } catch (const ffdc::ValidationError& e) {
    return set_error(FFDC_ERR_VALIDATION, e.what());
  } catch (const ffdc::NonConvergenceError& e) {
    return set_error(FFDC_ERR_NONCONVERGENCE, e.what());
  } catch (const ffdc::IdentificationError& e) {
    return set_error(FFDC_ERR_IDENTIFICATION, e.what());
  } catch (const ffdc::DomainError& e) {
    return set_error(FFDC_ERR_DOMAIN, e.what());
  } catch (const ffdc::ContractViolation& e) {
    return set_error(FFDC_ERR_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(FFDC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FFDC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FFDC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FFDC_ERR_INTERNAL, "unknown error");
  }
}

ffdc_status null_argument(const char* what) {
  return set_error(FFDC_ERR_ARGUMENT, std::string(what) + " must not be NULL");
}

ffdc_status copy_vector(const Eigen::VectorXd& v, double* out, size_t n) {
  if (!out) return null_argument("out");
  if (n < static_cast<size_t>(v.size()))
    return set_error(FFDC_ERR_ARGUMENT, "output buffer too small");
  for (long i = 0; i < v.size(); ++i) out[i] = v[i];
  return FFDC_OK;
}

}  // namespace

extern "C" {

const char* ffdc_version(void) { return "0.1.0"; }

const char* ffdc_last_error(void) { return last_error.c_str(); }

const char* ffdc_status_name(ffdc_status status) {
  switch (status) {
    case FFDC_OK: return "ok";
    case FFDC_ERR_VALIDATION: return "validation error";
    case FFDC_ERR_VERIFICATION: return "verification failure";
    case FFDC_ERR_NONCONVERGENCE: return "nonconvergence";
    case FFDC_ERR_IDENTIFICATION: return "identification error";
    case FFDC_ERR_DOMAIN: return "domain error";
    case FFDC_ERR_ARGUMENT: return "invalid argument";
    case FFDC_ERR_IO: return "i/o error";
    case FFDC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ffdc_status ffdc_config_load(const char* path, ffdc_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<ffdc_config>();
    h->cfg = ffdc::load_config(path);
    *out = h.release();
    return FFDC_OK;
  });
}

ffdc_status ffdc_config_parse(const char* json_text, const char* base_dir, ffdc_config** out) {
  if (!json_text) return null_argument("json_text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<ffdc_config>();
    h->cfg = ffdc::parse_config_text(json_text, base_dir ? base_dir : "");
    *out = h.release();
    return FFDC_OK;
  });
}

ffdc_status ffdc_config_set_seed(ffdc_config* cfg, uint64_t seed) {
  if (!cfg) return null_argument("cfg");
  cfg->cfg.simulate.seed = seed;
  return FFDC_OK;
}

ffdc_status ffdc_config_set_threads(ffdc_config* cfg, int threads) {
  if (!cfg) return null_argument("cfg");
  if (threads < 1) return set_error(FFDC_ERR_ARGUMENT, "threads must be >= 1");
  cfg->cfg.simulate.threads = threads;
  return FFDC_OK;
}

uint64_t ffdc_config_hash(const ffdc_config* cfg) { return cfg ? cfg->cfg.hash : 0; }

void ffdc_config_free(ffdc_config* cfg) { delete cfg; }

ffdc_status ffdc_simulate(const ffdc_config* cfg, const char* out_dir, ffdc_dataset** out) {
  if (!cfg) return null_argument("cfg");
  if (out) *out = nullptr;
  return guarded([&] {
    auto res = ffdc::cmd_simulate(cfg->cfg, out_dir ? out_dir : "");
    if (out) *out = new ffdc_dataset{std::move(res.data)};
    return FFDC_OK;
  });
}

ffdc_status ffdc_dataset_load(const char* consumers_csv, const char* panel_csv, ffdc_dataset** out) {
  if (!consumers_csv || !panel_csv) return null_argument("dataset path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new ffdc_dataset{ffdc::read_panel_csv(consumers_csv, panel_csv)};
    return FFDC_OK;
  });
}

ffdc_status ffdc_dataset_from_config(const ffdc_config* cfg, ffdc_dataset** out) {
  if (!cfg) return null_argument("cfg");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new ffdc_dataset{ffdc::load_dataset(cfg->cfg)};
    return FFDC_OK;
  });
}

int ffdc_dataset_num_consumers(const ffdc_dataset* data) { return data ? data->data.num_consumers() : 0; }
int ffdc_dataset_num_periods(const ffdc_dataset* data) { return data ? data->data.num_periods() : 0; }
int ffdc_dataset_num_products(const ffdc_dataset* data) { return data ? data->data.num_products() : 0; }

ffdc_status ffdc_dataset_choice(const ffdc_dataset* data, int i, int t, int* out) {
  if (!data) return null_argument("data");
  if (!out) return null_argument("out");
  if (i < 0 || i >= data->data.num_consumers() || t < 0 || t >= data->data.num_periods())
    return set_error(FFDC_ERR_ARGUMENT, "consumer or period index out of range");
  *out = data->data.choices(i)[t];
  return FFDC_OK;
}

ffdc_status ffdc_dataset_write(const ffdc_dataset* data, const char* consumers_csv,
                               const char* panel_csv) {
  if (!data) return null_argument("data");
  if (!consumers_csv || !panel_csv) return null_argument("dataset path");
  return guarded([&] {
    ffdc::write_panel_csv(data->data, consumers_csv, panel_csv);
    return FFDC_OK;
  });
}

void ffdc_dataset_free(ffdc_dataset* data) { delete data; }

ffdc_status ffdc_verify(const ffdc_config* cfg, ffdc_report** out) {
  if (!cfg) return null_argument("cfg");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto res = ffdc::cmd_verify(cfg->cfg);
    auto rep = std::make_unique<ffdc_report>();
    rep->passed = res.passed();
    rep->checks = static_cast<int>(res.checks.size());
    rep->failures = res.failures();
    rep->text = res.report;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : res.checks)
      j.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"tol", c.tol}, {"passed", c.passed}});
    rep->json = nlohmann::json{{"passed", rep->passed}, {"checks", j}}.dump(2);
    *out = rep.release();
    if (!(*out)->passed)
      return set_error(FFDC_ERR_VERIFICATION,
                       std::to_string((*out)->failures) + " of " +
                           std::to_string((*out)->checks) + " identities failed");
    return FFDC_OK;
  });
}

ffdc_status ffdc_detect_dstar(const ffdc_config* cfg, const ffdc_dataset* data, ffdc_report** out) {
  if (!cfg) return null_argument("cfg");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto res = data ? ffdc::cmd_detect_dstar(cfg->cfg, data->data)
                          : ffdc::cmd_detect_dstar_oracle(cfg->cfg);
    auto rep = std::make_unique<ffdc_report>();
    rep->text = res.report;
    rep->json = res.to_json().dump(2);
    for (const auto& r : res.reports)
      rep->caps.push_back(r.status == ffdc::CapStatus::none ? -1 : r.cap);
    rep->checks = static_cast<int>(res.reports.size());
    *out = rep.release();
    return FFDC_OK;
  });
}

int ffdc_report_passed(const ffdc_report* report) { return report && report->passed ? 1 : 0; }
int ffdc_report_num_checks(const ffdc_report* report) { return report ? report->checks : 0; }
int ffdc_report_num_failures(const ffdc_report* report) { return report ? report->failures : 0; }
const char* ffdc_report_text(const ffdc_report* report) { return report ? report->text.c_str() : ""; }
const char* ffdc_report_json(const ffdc_report* report) { return report ? report->json.c_str() : ""; }

ffdc_status ffdc_report_cap(const ffdc_report* report, int product, int* out) {
  if (!report) return null_argument("report");
  if (!out) return null_argument("out");
  if (product < 1 || product > static_cast<int>(report->caps.size()))
    return set_error(FFDC_ERR_ARGUMENT, "product out of range (or not a detect-dstar report)");
  *out = report->caps[product - 1];
  return FFDC_OK;
}

void ffdc_report_free(ffdc_report* report) { delete report; }

ffdc_status ffdc_estimate_run(const ffdc_config* cfg, const ffdc_dataset* data, ffdc_estimate** out) {
  if (!cfg) return null_argument("cfg");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto est = std::make_unique<ffdc_estimate>();
    if (data) {
      est->out = ffdc::cmd_estimate(cfg->cfg, data->data);
    } else {
      const auto loaded = ffdc::load_dataset(cfg->cfg);
      est->out = ffdc::cmd_estimate(cfg->cfg, loaded);
    }
    const auto& layout = est->out.result.theta_hat.layout();
    for (int k = 0; k < layout.size(); ++k) est->names.push_back(layout.name(k));
    est->json = est->out.to_json().dump(2) + "\n";
    est->table = est->out.table();
    *out = est.release();
    return FFDC_OK;
  });
}

int ffdc_estimate_dimension(const ffdc_estimate* est) {
  return est ? static_cast<int>(est->names.size()) : 0;
}

const char* ffdc_estimate_component_name(const ffdc_estimate* est, int index) {
  if (!est || index < 0 || index >= static_cast<int>(est->names.size())) return nullptr;
  return est->names[index].c_str();
}

ffdc_status ffdc_estimate_theta(const ffdc_estimate* est, double* out, size_t n) {
  if (!est) return null_argument("est");
  return copy_vector(est->out.result.theta_hat.values(), out, n);
}

ffdc_status ffdc_estimate_std_errors(const ffdc_estimate* est, double* out, size_t n) {
  if (!est) return null_argument("est");
  return copy_vector(est->out.result.std_errors, out, n);
}

ffdc_status ffdc_estimate_covariance(const ffdc_estimate* est, double* out, size_t n) {
  if (!est) return null_argument("est");
  const auto& c = est->out.result.covariance;
  if (!out) return null_argument("out");
  if (n < static_cast<size_t>(c.size())) return set_error(FFDC_ERR_ARGUMENT, "output buffer too small");
  for (long r = 0; r < c.rows(); ++r)
    for (long k = 0; k < c.cols(); ++k) out[r * c.cols() + k] = c(r, k);
  return FFDC_OK;
}

double ffdc_estimate_loglik(const ffdc_estimate* est) { return est ? est->out.result.loglik : 0.0; }
int ffdc_estimate_iterations(const ffdc_estimate* est) { return est ? est->out.result.iterations : 0; }
const char* ffdc_estimate_json(const ffdc_estimate* est) { return est ? est->json.c_str() : ""; }
const char* ffdc_estimate_table(const ffdc_estimate* est) { return est ? est->table.c_str() : ""; }

ffdc_status ffdc_estimate_write(const ffdc_estimate* est, const char* path) {
  if (!est) return null_argument("est");
  if (!path) return null_argument("path");
  return guarded([&] {
    ffdc::write_file_atomically(path, est->json);
    return FFDC_OK;
  });
}

void ffdc_estimate_free(ffdc_estimate* est) { delete est; }

ffdc_status ffdc_solve(const ffdc_config* cfg, int type_index, ffdc_solution** out) {
  if (!cfg) return null_argument("cfg");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto& c = cfg->cfg;
    if (type_index < 0 || type_index >= static_cast<int>(c.population.size()))
      return set_error(FFDC_ERR_ARGUMENT, "type_index out of range");
    auto h = std::make_unique<ffdc_solution>();
    h->sol = std::make_unique<ffdc::ConsumerSolution>(c.model, c.population[type_index],
                                                      c.price_process(), c.solve);
    *out = h.release();
    return FFDC_OK;
  });
}

int ffdc_solution_iterations(const ffdc_solution* sol) {
  return sol ? sol->sol->values().iterations : 0;
}

double ffdc_solution_residual(const ffdc_solution* sol) { return sol ? sol->sol->values().residual : 0.0; }

ffdc_status ffdc_solution_v(const ffdc_solution* sol, int l, int d, int z, double* out) {
  if (!sol) return null_argument("sol");
  if (!out) return null_argument("out");
  const auto& vf = sol->sol->values();
  if (l < 1 || l > vf.num_products() || d < 1 || d > vf.duration_cap() || z < 0 || z >= vf.num_z())
    return set_error(FFDC_ERR_ARGUMENT, "state index out of range");
  *out = vf.v(l, d, z);
  return FFDC_OK;
}

ffdc_status ffdc_solution_ccp(const ffdc_solution* sol, int l, int d, int z, int e_index, int choice,
                              double* out) {
  if (!sol) return null_argument("sol");
  if (!out) return null_argument("out");
  const auto& vf = sol->sol->values();
  if (l < 1 || l > vf.num_products() || d < 1 || d > vf.duration_cap() || z < 0 ||
      z >= vf.num_z() || e_index < 0 || e_index >= vf.num_e(z) || choice < 0 ||
      choice > vf.num_products())
    return set_error(FFDC_ERR_ARGUMENT, "state or choice index out of range");
  *out = vf.ccp(l, d, z, e_index)[choice];
  return FFDC_OK;
}

ffdc_status ffdc_solution_write(const ffdc_solution* sol, const char* path) {
  if (!sol) return null_argument("sol");
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ostringstream buf;
    ffdc::write_value_functions(sol->sol->values(), buf);
    ffdc::write_file_atomically(path, buf.str());
    return FFDC_OK;
  });
}

void ffdc_solution_free(ffdc_solution* sol) { delete sol; }

}  // extern "C"
