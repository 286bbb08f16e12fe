#include "mvfbm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mvfbm/errors.hpp"

namespace mvfbm::config {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  std::string unknown;
  for (const auto& [key, _] : obj.items()) {
    if (allowed.count(key)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += key;
  }
  if (!unknown.empty()) throw ConfigError(where + ": unknown key(s): " + unknown);
}

const Json& require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  return j;
}

double get_number(const Json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

double get_positive(const Json& obj, const std::string& key, double fallback, const std::string& where) {
  const double x = get_number(obj, key, fallback, where);
  if (!(x > 0.0)) throw ConfigError(where + "." + key + " must be positive");
  return x;
}

std::uint64_t get_count(const Json& obj, const std::string& key, std::uint64_t fallback, const std::string& where,
                        std::uint64_t minimum = 1) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < minimum) throw ConfigError(where + "." + key + " must be >= " + std::to_string(minimum));
  return x;
}

int get_int(const Json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

bool get_bool(const Json& obj, const std::string& key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_number_list(const Json& obj, const std::string& key, std::vector<double> fallback,
                                    const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + " must be a number or a non-empty list");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <class Int>
std::vector<Int> get_int_list(const Json& obj, const std::string& key, std::vector<Int> fallback,
                              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + " must be a non-empty list of integers");
  std::vector<Int> out;
  for (const Json& e : v) {
    if (!e.is_number_integer()) throw ConfigError(where + "." + key + " must contain only integers");
    if constexpr (std::is_unsigned_v<Int>) {
      if (e.get<std::int64_t>() < 1) throw ConfigError(where + "." + key + " entries must be >= 1");
    }
    out.push_back(e.get<Int>());
  }
  return out;
}

Common parse_common(const Json& cfg, const Overrides& o) {
  Common c;
  c.seed = get_count(cfg, "seed", kDefaultSeed, "config", 0);
  c.threads = static_cast<int>(get_count(cfg, "threads", 1, "config"));
  try {
    c.method = parse_fgn_method(get_string(cfg, "method", "davies-harte", "config"));
  } catch (const UsageError& e) {
    throw ConfigError(std::string("config.method: ") + e.what());
  }
  c.allow_brownian = get_bool(cfg, "allow_brownian", false, "config") || o.allow_brownian;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    c.threads = *o.threads;
  }
  return c;
}

const std::set<std::string> kCommonKeys{"seed", "threads", "method", "allow_brownian"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

/// Model block with the delay reconciled against a top-level "rho".
ModelSpec model_from(const Json& cfg) {
  if (!cfg.contains("model")) throw ConfigError("missing model block");
  const Json& block = require_object(cfg.at("model"), "model");
  double delay = 0.125;
  const bool top = cfg.contains("rho");
  const bool inner = block.contains("delay");
  if (top) delay = get_positive(cfg, "rho", 0.125, "config");
  if (inner) {
    const double d = get_positive(block, "delay", 0.125, "model");
    if (top && std::abs(d - delay) > 1e-12 * delay) throw ConfigError("config.rho and model.delay disagree");
    delay = d;
  }
  return parse_model(block, delay);
}

DriftTerm parse_term(const Json& t, std::size_t index) {
  const std::string where = "model.params.drift[" + std::to_string(index) + "]";
  require_object(t, where);
  const std::string kind = get_string(t, "term", "", where);
  if (kind == "kernel-interaction") {
    check_keys(t, {"term", "coef"}, where);
    return KernelInteractionTerm{get_number(t, "coef", 1.0, where)};
  }
  if (kind == "linear") {
    check_keys(t, {"term", "coef"}, where);
    return LinearTerm{get_number(t, "coef", 1.0, where)};
  }
  if (kind == "constant") {
    check_keys(t, {"term", "value"}, where);
    return ConstantTerm{get_number(t, "value", 0.0, where)};
  }
  if (kind == "delay-power") {
    check_keys(t, {"term", "coef", "power"}, where);
    const int power = get_int(t, "power", 1, where);
    if (power < 0) throw ConfigError(where + ".power must be >= 0");
    return DelayPowerTerm{get_number(t, "coef", 1.0, where), power};
  }
  if (kind == "delay-mean") {
    check_keys(t, {"term", "coef"}, where);
    return DelayMeanTerm{get_number(t, "coef", 1.0, where)};
  }
  if (kind == "mean") {
    check_keys(t, {"term", "coef"}, where);
    return MeanTerm{get_number(t, "coef", 1.0, where)};
  }
  if (kind == "present-power") {
    check_keys(t, {"term", "coef", "power"}, where);
    const int power = get_int(t, "power", 1, where);
    if (power < 0) throw ConfigError(where + ".power must be >= 0");
    return PresentPowerTerm{get_number(t, "coef", 1.0, where), power};
  }
  throw ConfigError(where + ".term: unknown drift term '" + kind +
                    "' (expected kernel-interaction, linear, constant, delay-power, delay-mean, mean, present-power)");
}

DiffusionSpec parse_diffusion(const Json& d) {
  const std::string where = "model.params.diffusion";
  require_object(d, where);
  const std::string kind = get_string(d, "kind", "constant", where);
  if (kind == "constant") {
    check_keys(d, {"kind", "sigma"}, where);
    return ConstantDiffusion{get_number(d, "sigma", 1.0, where)};
  }
  if (kind == "moment") {
    check_keys(d, {"kind", "sigma0", "sigma1"}, where);
    return MomentDiffusion{get_number(d, "sigma0", 1.0, where), get_number(d, "sigma1", 0.0, where)};
  }
  throw ConfigError(where + ".kind: unknown diffusion '" + kind + "' (expected constant or moment)");
}

InitialPathSpec parse_initial_path(const Json& block, InitialPathSpec fallback) {
  if (!block.contains("initial_path")) return fallback;
  const std::string where = "model.initial_path";
  const Json& p = block.at("initial_path");
  if (p.is_string()) return parse_initial_path(Json{{"initial_path", {{"id", p}}}}, fallback);
  require_object(p, where);
  const std::string id = get_string(p, "id", "", where);
  if (id == "abs") {
    check_keys(p, {"id"}, where);
    return AbsPath{};
  }
  if (id == "constant" || id == "zero") {
    check_keys(p, {"id", "value"}, where);
    return ConstantPath{get_number(p, "value", 0.0, where)};
  }
  if (id == "linear") {
    check_keys(p, {"id", "intercept", "slope"}, where);
    return LinearPath{get_number(p, "intercept", 0.0, where), get_number(p, "slope", 0.0, where)};
  }
  if (id == "gaussian") {
    check_keys(p, {"id", "mean", "sd"}, where);
    const double sd = get_number(p, "sd", 1.0, where);
    if (sd < 0.0) throw ConfigError(where + ".sd must be non-negative");
    return GaussianPath{get_number(p, "mean", 0.0, where), sd};
  }
  throw ConfigError(where + ".id: unknown initial path '" + id + "' (expected abs, constant, linear, gaussian)");
}

}  // namespace

Json load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
  if (j.contains("manifest_version")) {
    if (!j.contains("config") || !j.at("config").is_object())
      throw ConfigError("manifest has no recorded config");
    Json cfg = j.at("config");
    if (j.contains("seed")) cfg["seed"] = j.at("seed");
    if (j.contains("threads")) cfg["threads"] = j.at("threads");
    return cfg;
  }
  return j;
}

void check_hurst(double hurst, bool allow_brownian) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("hurst must lie in (0, 1), got " + std::to_string(hurst));
  if (hurst == 0.5 && !allow_brownian)
    throw ConfigError("hurst = 0.5 is outside the supported range (0, 1/2) U (1/2, 1); "
                      "pass --allow-brownian for Brownian sanity runs");
}

ModelSpec parse_model(const Json& block, double delay) {
  require_object(block, "model");
  check_keys(block, {"id", "params", "delay", "initial_path", "dim"}, "model");
  if (!block.contains("id")) throw ConfigError("model: missing 'id'");
  const std::string id = get_string(block, "id", "", "model");
  if (block.contains("delay")) delay = get_positive(block, "delay", delay, "model");
  const Json params = block.contains("params") ? require_object(block.at("params"), "model.params") : Json::object();
  const auto dim = static_cast<std::size_t>(get_count(block, "dim", 1, "model"));
  const std::string where = "model.params";

  if (id == "opinion") {
    check_keys(params, {"a1", "a2", "a3", "a4", "a5"}, where);
    if (dim != 1) throw ConfigError("model.dim: the opinion model is one-dimensional");
    OpinionParams p;
    p.a1 = get_number(params, "a1", p.a1, where);
    p.a2 = get_number(params, "a2", p.a2, where);
    p.a3 = get_number(params, "a3", p.a3, where);
    p.a4 = get_number(params, "a4", p.a4, where);
    p.a5 = get_number(params, "a5", p.a5, where);
    p.delay = delay;
    if (block.contains("initial_path")) {
      const InitialPathSpec path = parse_initial_path(block, AbsPath{});
      ModelSpec m = make_custom_model(
          "opinion",
          {KernelInteractionTerm{p.a1}, LinearTerm{p.a2}, DelayPowerTerm{p.a3, 3}, DelayMeanTerm{p.a4}},
          ConstantDiffusion{p.a5}, path, delay);
      m.growth_exponent = 2.0;
      return m;
    }
    return make_opinion_model(p);
  }
  if (id == "zero") {
    check_keys(params, {"beta"}, where);
    return make_custom_model("zero", {}, ConstantDiffusion{get_number(params, "beta", 1.0, where)},
                             parse_initial_path(block, ConstantPath{0.0}), delay, dim);
  }
  if (id == "linear") {
    check_keys(params, {"a", "b", "beta"}, where);
    return make_custom_model(
        "linear",
        {LinearTerm{get_number(params, "a", -1.0, where)}, ConstantTerm{get_number(params, "b", 0.0, where)}},
        ConstantDiffusion{get_number(params, "beta", 1.0, where)}, parse_initial_path(block, ConstantPath{1.0}),
        delay, dim);
  }
  if (id == "custom") {
    check_keys(params, {"drift", "diffusion", "name"}, where);
    std::vector<DriftTerm> terms;
    if (params.contains("drift")) {
      const Json& list = params.at("drift");
      if (!list.is_array()) throw ConfigError(where + ".drift must be a list of terms");
      for (std::size_t i = 0; i < list.size(); ++i) terms.push_back(parse_term(list[i], i));
    }
    const DiffusionSpec diffusion =
        params.contains("diffusion") ? parse_diffusion(params.at("diffusion")) : DiffusionSpec{ConstantDiffusion{1.0}};
    return make_custom_model(get_string(params, "name", "custom", where), std::move(terms), diffusion,
                             parse_initial_path(block, ConstantPath{0.0}), delay, dim);
  }
  throw ConfigError("model.id: unknown model '" + id + "' (expected opinion, zero, linear, custom)");
}

SimulateConfig parse_simulate(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"model", "rho", "M", "T", "N", "hurst"}), "config");
  SimulateConfig c;
  c.common = parse_common(cfg, o);
  c.model = model_from(cfg);
  const auto m = static_cast<std::size_t>(get_count(cfg, "M", 16, "config"));
  const double horizon = get_positive(cfg, "T", 1.0, "config");
  try {
    c.grid = TimeGrid(c.model.delay, m, horizon);
  } catch (const UsageError& e) {
    throw ConfigError(std::string("config.T/M: ") + e.what());
  }
  c.particles = static_cast<std::size_t>(get_count(cfg, "N", 200, "config"));
  c.hurst = get_number(cfg, "hurst", 0.7, "config");
  check_hurst(c.hurst, c.common.allow_brownian);
  check_hurst_regime(c.model, Hurst(c.hurst));
  return c;
}

ConvergenceStudy parse_convergence(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"model", "rho", "T", "N", "hurst", "fine_level", "coarse_levels", "repeats", "p",
                               "norm"}),
             "config");
  const Common common = parse_common(cfg, o);
  ConvergenceStudy s;
  s.model = model_from(cfg);
  s.hursts = get_number_list(cfg, "hurst", {0.6, 0.9}, "config");
  s.horizon = get_positive(cfg, "T", 1.0, "config");
  s.fine_level = get_int(cfg, "fine_level", 14, "config");
  if (s.fine_level < 1 || s.fine_level > 20) throw ConfigError("config.fine_level must lie in [1, 20]");
  s.coarse_levels = get_int_list<int>(cfg, "coarse_levels", {7, 8, 9, 10}, "config");
  s.particles = static_cast<std::size_t>(get_count(cfg, "N", 200, "config"));
  s.repeats = static_cast<std::size_t>(get_count(cfg, "repeats", 8, "config"));
  s.p = get_number(cfg, "p", 2.0, "config");
  if (!(s.p >= 1.0)) throw ConfigError("config.p must be >= 1");
  const std::string norm = get_string(cfg, "norm", "terminal", "config");
  if (norm == "terminal") {
    s.norm = ErrorNorm::kTerminal;
  } else if (norm == "sup") {
    s.norm = ErrorNorm::kSupremum;
  } else {
    throw ConfigError("config.norm must be 'terminal' or 'sup'");
  }
  s.seed = common.seed;
  s.threads = common.threads;
  s.method = common.method;
  for (double h : s.hursts) {
    check_hurst(h, common.allow_brownian);
    check_hurst_regime(s.model, Hurst(h));
    if (s.norm == ErrorNorm::kSupremum && h < 0.5)
      throw ConfigError("config.norm: supremum errors are only available for H > 1/2");
  }
  try {
    const TimeGrid fine = TimeGrid::dyadic(s.model.delay, s.fine_level, s.horizon);
    for (int level : s.coarse_levels) {
      if (level < 0 || level > s.fine_level)
        throw ConfigError("config.coarse_levels: level " + std::to_string(level) + " must lie in [0, fine_level]");
      (void)fine.coarsened(std::size_t{1} << (s.fine_level - level));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const UsageError& e) {
    throw ConfigError(std::string("config.coarse_levels/fine_level: ") + e.what());
  }
  return s;
}

ChaosStudy parse_chaos(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"model", "rho", "M", "T", "N_list", "N_ref", "hurst", "p", "repeats"}), "config");
  const Common common = parse_common(cfg, o);
  ChaosStudy s;
  s.model = model_from(cfg);
  const auto m = static_cast<std::size_t>(get_count(cfg, "M", 16, "config"));
  const double horizon = get_positive(cfg, "T", 1.0, "config");
  try {
    s.grid = TimeGrid(s.model.delay, m, horizon);
  } catch (const UsageError& e) {
    throw ConfigError(std::string("config.T/M: ") + e.what());
  }
  s.particle_counts = get_int_list<std::size_t>(cfg, "N_list", {32, 64, 128, 256}, "config");
  if (!std::is_sorted(s.particle_counts.begin(), s.particle_counts.end()))
    throw ConfigError("config.N_list must be ascending");
  s.reference_particles = static_cast<std::size_t>(get_count(cfg, "N_ref", 512, "config"));
  if (s.reference_particles < 2 * s.particle_counts.back())
    throw ConfigError("config.N_ref must be at least twice the largest entry of N_list");
  s.hurst = get_number(cfg, "hurst", 0.7, "config");
  s.p = get_number(cfg, "p", 2.0, "config");
  if (!(s.p >= 1.0)) throw ConfigError("config.p must be >= 1");
  s.repeats = static_cast<std::size_t>(get_count(cfg, "repeats", 16, "config"));
  s.seed = common.seed;
  s.threads = common.threads;
  s.method = common.method;
  check_hurst(s.hurst, common.allow_brownian);
  check_hurst_regime(s.model, Hurst(s.hurst));
  return s;
}

MaximalConfig parse_maximal(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"hurst", "p", "t_list", "paths", "grid_points"}), "config");
  MaximalConfig c;
  c.common = parse_common(cfg, o);
  c.hursts = get_number_list(cfg, "hurst", c.hursts, "config");
  for (double h : c.hursts) check_hurst(h, c.common.allow_brownian);
  c.p = get_positive(cfg, "p", 2.0, "config");
  c.horizons = get_number_list(cfg, "t_list", c.horizons, "config");
  for (double t : c.horizons)
    if (!(t > 0.0)) throw ConfigError("config.t_list entries must be positive");
  const auto [lo, hi] = std::minmax_element(c.horizons.begin(), c.horizons.end());
  if (*hi < 10.0 * *lo) throw ConfigError("config.t_list must span at least one decade");
  c.paths = static_cast<std::size_t>(get_count(cfg, "paths", 10000, "config"));
  if (c.paths < 10000) throw ConfigError("config.paths must be at least 10000");
  c.grid_points = static_cast<std::size_t>(get_count(cfg, "grid_points", 1024, "config"));
  return c;
}

MomentStudy parse_moments(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"model", "rho", "T", "levels", "N", "hurst", "p", "repeats"}), "config");
  const Common common = parse_common(cfg, o);
  MomentStudy s;
  s.model = model_from(cfg);
  s.horizon = get_positive(cfg, "T", 1.0, "config");
  s.levels = get_int_list<int>(cfg, "levels", {5, 6, 7, 8, 9}, "config");
  s.particles = static_cast<std::size_t>(get_count(cfg, "N", 200, "config"));
  s.hurst = get_number(cfg, "hurst", 0.7, "config");
  s.p = get_positive(cfg, "p", 4.0, "config");
  s.repeats = static_cast<std::size_t>(get_count(cfg, "repeats", 4, "config"));
  s.seed = common.seed;
  s.threads = common.threads;
  s.method = common.method;
  check_hurst(s.hurst, common.allow_brownian);
  check_hurst_regime(s.model, Hurst(s.hurst));
  for (int level : s.levels) {
    try {
      (void)TimeGrid::dyadic(s.model.delay, level, s.horizon);
    } catch (const UsageError& e) {
      throw ConfigError(std::string("config.levels: ") + e.what());
    }
  }
  return s;
}

FbmConfig parse_fbm(const Json& cfg, const Overrides& o) {
  require_object(cfg, "config");
  check_keys(cfg, with_common({"n", "dt", "hurst", "streams"}), "config");
  FbmConfig c;
  c.common = parse_common(cfg, o);
  c.n = static_cast<std::size_t>(get_count(cfg, "n", c.n, "config"));
  c.dt = get_positive(cfg, "dt", 1.0 / static_cast<double>(c.n), "config");
  c.hurst = get_number(cfg, "hurst", c.hurst, "config");
  c.streams = static_cast<std::size_t>(get_count(cfg, "streams", 1, "config"));
  check_hurst(c.hurst, c.common.allow_brownian);
  if (c.common.method == FgnMethod::kCholesky && c.n > kCholeskyMaxN)
    throw ConfigError("config.n: the Cholesky method is limited to n <= " + std::to_string(kCholeskyMaxN));
  return c;
}

}  // namespace mvfbm::config
