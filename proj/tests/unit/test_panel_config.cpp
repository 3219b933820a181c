#include "support/fixtures.hpp"

#include "ffdc/config.hpp"
#include "ffdc/errors.hpp"
#include "ffdc/panel.hpp"
#include "ffdc/simulator.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

using namespace ffdc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ffdc_unit_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kMinimal = R"({
  "model": {"J": 1, "gamma": 1.0, "beta_sc": [[0.0]], "beta_dep": [0.2], "d_star": [2]},
  "population": [{"alpha": [0.0], "delta": 0.9, "mu": 5.0}],
  "prices": {"rho_form": "hilo", "z_support": [{"regular": [2.0], "promotion": [1.0]}],
             "z_transition": [[1.0]], "promo_prob": [[0.3]]},
  "simulate": {"N": 10, "T": 3, "seed": 1}
})";

}  // namespace

TEST_CASE("panel CSV round trip") {
  SimulationSettings s;
  s.num_consumers = 30;
  s.num_periods = 5;
  s.seed = 12;
  const auto data = simulate_panel({fx::reference_type()}, fx::reference_primitives(),
                                   fx::reference_process(), s);
  const auto c = scratch("consumers.csv"), p = scratch("panel.csv");
  write_panel_csv(data, c.string(), p.string());
  const auto back = read_panel_csv(c.string(), p.string());
  REQUIRE(back.num_consumers() == 30);
  CHECK(back.num_periods() == 5);
  CHECK(back.num_products() == 2);
  for (int i = 0; i < 30; ++i) {
    CHECK(back.id(i) == data.id(i));
    CHECK(back.initial(i) == data.initial(i));
    CHECK(back.mu(i) == data.mu(i));
    for (int t = 0; t < 5; ++t) {
      CHECK(back.choices(i)[t] == data.choices(i)[t]);
      CHECK(back.prices(i).z[t] == data.prices(i).z[t]);
      CHECK(back.prices(i).p_at(t)[1] == data.prices(i).p_at(t)[1]);
      CHECK(back.prices(i).e_at(t)[0] == data.prices(i).e_at(t)[0]);
    }
  }
}

TEST_CASE("panel CSV schema errors carry file and line") {
  const auto c = scratch("c_bad.csv"), p = scratch("p_bad.csv");
  write(c, "id,mu,l1,d1\n1,10,1,1\n2,10,1,1\n");
  write(p, "id,t,y,z_id,e_1,p_1\n1,1,0,0,0,2.0\n1,2,1,0,0,2.0\n2,1,0,0,0,2.0\n");
  CHECK_THROWS_AS(read_panel_csv(c.string(), p.string()), ValidationError);  // unbalanced

  write(p, "id,t,y,z,e_1,p_1\n1,1,0,0,0,2.0\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(c.string(), p.string()), doctest::Contains("p_bad.csv:1"),
                       ValidationError);

  write(p, "id,t,y,z_id,e_1,p_1\n1,1,0,0,0,2.0\n1,2,7,0,0,2.0\n2,1,0,0,0,2.0\n2,2,0,0,0,2.0\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(c.string(), p.string()), doctest::Contains(":3"), ValidationError);
}

TEST_CASE("format_real round-trips doubles") {
  for (double x : {0.1, 1.0 / 3.0, 2.5e-300, -7.0, 123456789.125}) CHECK(std::stod(format_real(x)) == x);
}

TEST_CASE("config: minimal J=1 document and defaults") {
  const auto cfg = parse_config_text(kMinimal);
  CHECK(cfg.model.num_products == 1);
  CHECK(cfg.population.size() == 1);
  CHECK(cfg.population[0].weight == 1.0);
  CHECK(cfg.population[0].initial_dist.front().state == EndogenousState{1, 1});
  CHECK(cfg.simulate.num_consumers == 10);
  CHECK(cfg.estimate.options.mode == MatchMode::exact);
  CHECK(cfg.hash == parse_config_text(kMinimal).hash);
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
}

TEST_CASE("config: unknown keys and bad values name the path") {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["model"]["beta_dpe"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("model.beta_dpe: unknown key"), ValidationError);

  doc = nlohmann::json::parse(kMinimal);
  doc["model"]["beta_dep"] = {0.2, 0.3};
  CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("model.beta_dep"), ValidationError);

  doc = nlohmann::json::parse(kMinimal);
  doc["population"][0]["delta"] = 1.5;
  CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("delta"), ValidationError);

  doc = nlohmann::json::parse(kMinimal);
  doc["estimate"] = {{"mode", "kernel"}, {"bandwidth", -1}};
  CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("estimate.bandwidth"), ValidationError);

  CHECK_THROWS_WITH_AS(parse_config_text("{"), doctest::Contains("not valid JSON"), ValidationError);
}

TEST_CASE("config: price process by file reference") {
  const auto dir = scratch("cfgdir");
  fs::create_directories(dir);
  auto doc = nlohmann::json::parse(kMinimal);
  write(dir / "proc.json", doc["prices"].dump());
  doc["prices"] = {{"file", "proc.json"}};
  write(dir / "run.json", doc.dump());
  const auto cfg = load_config((dir / "run.json").string());
  CHECK(cfg.price_process().num_z() == 1);
  CHECK(cfg.prices_ref.find("proc.json") != std::string::npos);
}
