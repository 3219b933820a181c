// Exercises the shared library through its C header only.
#include "ffdc/ffdc.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string data_file(const char* name) { return (fs::path(FFDC_TEST_DIR) / "data" / name).string(); }

ffdc_config* load(const char* name) {
  ffdc_config* cfg = nullptr;
  REQUIRE(ffdc_config_load(data_file(name).c_str(), &cfg) == FFDC_OK);
  return cfg;
}

}  // namespace

TEST_CASE("status names and null arguments") {
  CHECK(std::string(ffdc_status_name(FFDC_ERR_VERIFICATION)) == "verification failure");
  CHECK(ffdc_config_load(nullptr, nullptr) == FFDC_ERR_ARGUMENT);
  CHECK(std::string(ffdc_last_error()).find("NULL") != std::string::npos);
  CHECK(ffdc_verify(nullptr, nullptr) == FFDC_ERR_ARGUMENT);
  ffdc_config_free(nullptr);
  CHECK(ffdc_dataset_num_consumers(nullptr) == 0);
}

TEST_CASE("config errors map to validation status") {
  ffdc_config* cfg = nullptr;
  CHECK(ffdc_config_load(data_file("unknown_key.json").c_str(), &cfg) == FFDC_ERR_VALIDATION);
  CHECK(cfg == nullptr);
  CHECK(std::string(ffdc_last_error()).find("model.delta") != std::string::npos);
  CHECK(ffdc_config_parse("{\"model\": 3}", nullptr, &cfg) == FFDC_ERR_VALIDATION);
}

TEST_CASE("reference verification passes; corrupted verification fails") {
  ffdc_config* cfg = load("reference.json");
  ffdc_report* rep = nullptr;
  CHECK(ffdc_verify(cfg, &rep) == FFDC_OK);
  CHECK(ffdc_report_passed(rep) == 1);
  CHECK(ffdc_report_num_checks(rep) > 0);
  CHECK(ffdc_report_num_failures(rep) == 0);
  ffdc_report_free(rep);

  ffdc_report* dstar = nullptr;
  REQUIRE(ffdc_detect_dstar(cfg, nullptr, &dstar) == FFDC_OK);
  int cap = 0;
  CHECK(ffdc_report_cap(dstar, 1, &cap) == FFDC_OK);
  CHECK(cap == 3);
  CHECK(ffdc_report_cap(dstar, 3, &cap) == FFDC_ERR_ARGUMENT);
  ffdc_report_free(dstar);
  ffdc_config_free(cfg);

  cfg = load("corrupted.json");
  CHECK(ffdc_verify(cfg, &rep) == FFDC_ERR_VERIFICATION);
  REQUIRE(rep != nullptr);
  CHECK(ffdc_report_num_failures(rep) > 0);
  CHECK(std::string(ffdc_report_text(rep)).find("FAIL") != std::string::npos);
  ffdc_report_free(rep);
  ffdc_config_free(cfg);

  cfg = load("myopic.json");
  CHECK(ffdc_verify(cfg, &rep) == FFDC_OK);
  ffdc_report_free(rep);
  ffdc_config_free(cfg);
}

TEST_CASE("value functions through the C API") {
  ffdc_config* cfg = load("reference.json");
  ffdc_solution* sol = nullptr;
  REQUIRE(ffdc_solve(cfg, 0, &sol) == FFDC_OK);
  CHECK(ffdc_solution_residual(sol) < 1e-12);
  double v2 = 0, v3 = 0, sum = 0;
  CHECK(ffdc_solution_v(sol, 1, 3, 0, &v3) == FFDC_OK);
  CHECK(ffdc_solution_v(sol, 1, 2, 0, &v2) == FFDC_OK);
  CHECK(v2 != v3);
  for (int y = 0; y <= 2; ++y) {
    double p = 0;
    CHECK(ffdc_solution_ccp(sol, 2, 1, 1, 3, y, &p) == FFDC_OK);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ffdc_solution_v(sol, 1, 4, 0, &v2) == FFDC_ERR_ARGUMENT);
  CHECK(ffdc_solve(cfg, 5, &sol) == FFDC_ERR_ARGUMENT);
  ffdc_solution_free(sol);
  ffdc_config_free(cfg);
}

TEST_CASE("simulate and estimate recover the truth") {
  ffdc_config* cfg = load("estimation.json");
  ffdc_dataset* data = nullptr;
  REQUIRE(ffdc_simulate(cfg, nullptr, &data) == FFDC_OK);
  CHECK(ffdc_dataset_num_consumers(data) == 50000);
  CHECK(ffdc_dataset_num_periods(data) == 4);
  int y = -1;
  CHECK(ffdc_dataset_choice(data, 0, 0, &y) == FFDC_OK);
  CHECK((y >= 0 && y <= 2));

  ffdc_estimate* est = nullptr;
  REQUIRE(ffdc_estimate_run(cfg, data, &est) == FFDC_OK);
  REQUIRE(ffdc_estimate_dimension(est) == 4);
  CHECK(std::string(ffdc_estimate_component_name(est, 1)) == "beta_sc_tilde(1,2)");
  std::vector<double> theta(4), se(4), cov(16);
  CHECK(ffdc_estimate_theta(est, theta.data(), 4) == FFDC_OK);
  CHECK(ffdc_estimate_std_errors(est, se.data(), 4) == FFDC_OK);
  CHECK(ffdc_estimate_covariance(est, cov.data(), 16) == FFDC_OK);
  CHECK(ffdc_estimate_theta(est, theta.data(), 3) == FFDC_ERR_ARGUMENT);
  const double truth[] = {1.0, 0.3, 1.0, 1.2};
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(theta[k] - truth[k]) < 3 * se[k]);
    CHECK(se[k] == doctest::Approx(std::sqrt(cov[k * 4 + k])));
  }
  CHECK(std::strstr(ffdc_estimate_json(est), "\"theta_hat\"") != nullptr);
  ffdc_estimate_free(est);
  ffdc_dataset_free(data);
  ffdc_config_free(cfg);
}

TEST_CASE("too-short panels have no feasible pairs") {
  ffdc_config* cfg = load("minimal.json");
  ffdc_dataset* data = nullptr;
  REQUIRE(ffdc_simulate(cfg, nullptr, &data) == FFDC_OK);
  CHECK(ffdc_dataset_num_products(data) == 1);
  ffdc_estimate* est = nullptr;
  CHECK(ffdc_estimate_run(cfg, data, &est) == FFDC_ERR_VALIDATION);
  CHECK(std::string(ffdc_last_error()).find("no feasible pairs") != std::string::npos);
  ffdc_dataset_free(data);
  ffdc_config_free(cfg);
}
