#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <string>

#include "mvfbm/config.hpp"
#include "mvfbm/errors.hpp"

using namespace mvfbm;
using config::Json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal opinion convergence config takes the defaults") {
    const ConvergenceStudy s = config::parse_convergence(Json::parse(R"({"model": {"id": "opinion"}})"));
    CHECK(s.model.id == "opinion");
    CHECK(s.model.delay == 0.125);
    CHECK(s.horizon == 1.0);
    CHECK(s.particles == 200);
    CHECK(s.hursts == std::vector<double>{0.6, 0.9});
    CHECK(s.fine_level == 14);
    CHECK(s.coarse_levels == std::vector<int>{7, 8, 9, 10});
    CHECK(s.seed == config::kDefaultSeed);
    const EmpiricalMeasure law({0.5, -0.25});
    const EmpiricalMeasure law_d({0.1, 0.2});
    double x = 0.5, xd = 0.1, out = 0.0;
    s.model.drift(0.0, {&x, 1}, {&xd, 1}, law, law_d, {&out, 1});
    CHECK(out == opinion_drift(0.0, x, xd, law, law_d, OpinionParams{}));
  }

  TEST_CASE("empty config reports the missing model") {
    CHECK(error_of([] { config::parse_simulate(Json::object()); }) == "missing model block");
    const auto path = std::filesystem::temp_directory_path() / "mvfbm_empty_config.json";
    { std::ofstream(path) << "\n"; }
    CHECK(config::load(path) == Json::object());
    std::filesystem::remove(path);
  }

  TEST_CASE("unknown keys are listed") {
    const std::string msg =
        error_of([] { config::parse_simulate(Json::parse(R"({"model": {"id": "opinion"}, "foo": 1, "bar": 2})")); });
    CHECK(msg.find("foo") != std::string::npos);
    CHECK(msg.find("bar") != std::string::npos);
    const std::string inner = error_of(
        [] { config::parse_simulate(Json::parse(R"({"model": {"id": "opinion", "params": {"a6": 1}}})")); });
    CHECK(inner.find("a6") != std::string::npos);
  }

  TEST_CASE("brownian runs need the override") {
    const Json cfg = Json::parse(R"({"model": {"id": "zero"}, "hurst": 0.5})");
    CHECK(error_of([&] { config::parse_simulate(cfg); }).find("--allow-brownian") != std::string::npos);
    config::Overrides o;
    o.allow_brownian = true;
    CHECK(config::parse_simulate(cfg, o).hurst == 0.5);
    CHECK_THROWS_AS(config::check_hurst(1.2, true), ConfigError);
  }

  TEST_CASE("rough regime requires constant diffusion") {
    const Json cfg = Json::parse(
        R"({"model": {"id": "custom", "params": {"diffusion": {"kind": "moment", "sigma1": 1}}}, "hurst": 0.3})");
    CHECK(error_of([&] { config::parse_simulate(cfg); }).find("H < 1/2") != std::string::npos);
  }

  TEST_CASE("grid divisibility is checked eagerly") {
    const std::string msg =
        error_of([] { config::parse_simulate(Json::parse(R"({"model": {"id": "opinion"}, "M": 16, "T": 1.003})")); });
    CHECK(msg.find("nearest valid T") != std::string::npos);
    CHECK_THROWS_AS(config::parse_convergence(Json::parse(R"({"model": {"id": "opinion"}, "coarse_levels": [2]})")),
                    ConfigError);
    CHECK_THROWS_AS(config::parse_simulate(Json::parse(R"({"model": {"id": "opinion", "delay": 0.25}, "rho": 0.125})")),
                    ConfigError);
  }

  TEST_CASE("field type errors name the field") {
    CHECK(error_of([] { config::parse_simulate(Json::parse(R"({"model": {"id": "opinion"}, "N": -3})")); })
              .find("config.N") != std::string::npos);
    CHECK(error_of([] { config::parse_simulate(Json::parse(R"({"model": {"id": "opinion"}, "N": "many"})")); })
              .find("config.N") != std::string::npos);
    CHECK(error_of([] { config::parse_simulate(Json::parse(R"({"model": {"id": "nope"}})")); }).find("model.id") !=
          std::string::npos);
    CHECK(error_of([] {
            config::parse_simulate(Json::parse(R"({"model": {"id": "custom", "params": {"drift": [{"term": "x"}]}}})"));
          }).find("drift[0]") != std::string::npos);
    CHECK(error_of([] { config::parse_maximal(Json::parse(R"({"t_list": [1, 2]})")); }).find("decade") !=
          std::string::npos);
  }

  TEST_CASE("custom model from terms") {
    const config::SimulateConfig c = config::parse_simulate(Json::parse(R"({
      "model": {"id": "custom", "params": {"drift": [{"term": "linear", "coef": -2}, {"term": "constant", "value": 1}],
                "diffusion": {"kind": "constant", "sigma": 0.5}}, "initial_path": {"id": "constant", "value": 1}},
      "M": 4, "T": 0.25, "N": 2})"));
    const EmpiricalMeasure law({1.0});
    double x = 1.0, out = 0.0;
    c.model.drift(0.0, {&x, 1}, {&x, 1}, law, law, {&out, 1});
    CHECK(out == -1.0);
    CHECK(c.grid.horizon_steps() == 8);
  }

  TEST_CASE("overrides take precedence") {
    config::Overrides o;
    o.seed = 77;
    o.threads = 3;
    const ChaosStudy s = config::parse_chaos(Json::parse(R"({"model": {"id": "opinion"}, "seed": 1})"), o);
    CHECK(s.seed == 77);
    CHECK(s.threads == 3);
  }

  TEST_CASE("a manifest replays its recorded config") {
    const auto path = std::filesystem::temp_directory_path() / "mvfbm_manifest.json";
    {
      std::ofstream(path) << R"({"manifest_version": 1, "seed": 9, "threads": 2,
                                 "config": {"model": {"id": "opinion"}, "N": 5}})";
    }
    const Json cfg = config::load(path);
    CHECK(cfg.at("seed") == 9);
    CHECK(config::parse_simulate(cfg).particles == 5);
    std::filesystem::remove(path);
  }
}
