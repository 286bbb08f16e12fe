// mvfbm: fBm sampling, particle simulation and the convergence/chaos/moment studies.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvfbm/config.hpp"
#include "mvfbm/errors.hpp"
#include "mvfbm/experiments.hpp"
#include "mvfbm/fgn.hpp"
#include "mvfbm/report.hpp"
#include "mvfbm/solver.hpp"
#include "mvfbm/version.hpp"

namespace fs = std::filesystem;
using namespace mvfbm;
using config::Json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::string svg;
  bool allow_brownian = false;
};

struct FbmFlags {
  std::optional<std::size_t> n;
  std::optional<double> dt;
  std::optional<double> hurst;
  std::optional<std::size_t> streams;
  std::optional<std::string> method;
};

Json load_config(const Globals& g) { return g.config_path.empty() ? Json::object() : config::load(g.config_path); }

config::Overrides overrides(const Globals& g) { return {g.seed, g.threads, g.allow_brownian}; }

fs::path output_path(const Globals& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

/// Recorded config: the input with the effective seed, threads and method filled in,
/// so that replaying the manifest reproduces the run.
Json effective_config(Json cfg, std::uint64_t seed, int threads, FgnMethod method, bool allow_brownian) {
  cfg["seed"] = seed;
  cfg["threads"] = threads;
  cfg["method"] = std::string(to_string(method));
  if (allow_brownian) cfg["allow_brownian"] = true;
  return cfg;
}

class Run {
 public:
  Run(std::string subcommand, const Globals& g) : subcommand_(std::move(subcommand)), globals_(g), start_(Clock::now()) {}

  void csv(const report::CsvTable& table, const fs::path& path) {
    report::write_csv(table, path);
    outputs_.push_back(path);
  }

  void svg(const std::string& title, const std::string& x_label, const std::string& y_label,
           const std::vector<report::PlotSeries>& series) {
    if (globals_.svg.empty()) return;
    report::write_svg(report::render_svg(title, x_label, y_label, series), globals_.svg);
    outputs_.push_back(globals_.svg);
  }

  void manifest(const Json& cfg, std::uint64_t seed, int threads, const fs::path& primary) {
    const double wall = std::chrono::duration<double>(Clock::now() - start_).count();
    Json m;
    m["manifest_version"] = 1;
    m["tool"] = "mvfbm";
    m["tool_version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["config_hash"] = report::fnv1a_hex(cfg.dump());
    m["seed"] = seed;
    m["threads"] = threads;
    m["wall_clock_seconds"] = wall;
    m["config"] = cfg;
    Json outs = Json::array();
    for (const fs::path& p : outputs_) outs.push_back({{"path", p.string()}, {"fnv1a64", report::file_digest(p)}});
    m["outputs"] = outs;
    const fs::path path = primary.string() + ".manifest.json";
    report::write_text(path, m.dump(2) + "\n");
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::string subcommand_;
  Globals globals_;
  Clock::time_point start_;
  std::vector<fs::path> outputs_;
};

int cmd_fbm(const Globals& g, const FbmFlags& f) {
  Json cfg = load_config(g);
  if (f.n) cfg["n"] = *f.n;
  if (f.dt) cfg["dt"] = *f.dt;
  if (f.hurst) cfg["hurst"] = *f.hurst;
  if (f.streams) cfg["streams"] = *f.streams;
  if (f.method) cfg["method"] = *f.method;
  const config::FbmConfig c = config::parse_fbm(cfg, overrides(g));
  cfg["n"] = c.n;
  cfg["dt"] = c.dt;
  cfg["hurst"] = c.hurst;
  cfg["streams"] = c.streams;

  Run run("fbm", g);
  const FgnSampler sampler(c.n, c.dt, Hurst(c.hurst), c.common.method);
  std::vector<NoiseBlock> blocks;
  for (std::size_t s = 0; s < c.streams; ++s) blocks.push_back(sampler.sample(c.common.seed, s));
  const fs::path out = output_path(g, "fbm.csv");
  run.csv(report::fbm_table(blocks), out);
  run.manifest(effective_config(cfg, c.common.seed, c.common.threads, c.common.method, c.common.allow_brownian),
               c.common.seed, c.common.threads, out);
  std::cout << "fbm: " << c.streams << " stream(s) of " << c.n << " increments, H = " << c.hurst << ", dt = " << c.dt
            << ", method " << to_string(c.common.method) << "\n  wrote " << out.string() << "\n";
  return 0;
}

int cmd_simulate(const Globals& g) {
  const Json cfg = load_config(g);
  const config::SimulateConfig c = config::parse_simulate(cfg, overrides(g));
  Run run("simulate", g);
  const EnsembleTrajectory traj = mvfbm::run(c.model, c.grid, c.particles, Hurst(c.hurst), c.common.seed,
                                             {c.common.method, c.common.threads});
  const fs::path out = output_path(g, "trajectory.csv");
  run.csv(report::trajectory_table(traj), out);
  run.manifest(effective_config(cfg, c.common.seed, c.common.threads, c.common.method, c.common.allow_brownian),
               c.common.seed, c.common.threads, out);
  std::cout << "simulate: model " << c.model.id << ", N = " << c.particles << ", H = " << c.hurst
            << ", step = " << c.grid.step() << ", " << c.grid.horizon_steps() << " steps\n"
            << "  second moment at T: " << moment(traj.law(static_cast<std::ptrdiff_t>(c.grid.horizon_steps())), 2.0)
            << "\n  wrote " << out.string() << "\n";
  if (!traj.all_finite()) {
    std::cerr << "error: non-finite particle states (numerical blow-up)\n";
    return 3;
  }
  return 0;
}

int cmd_convergence(const Globals& g) {
  const Json cfg = load_config(g);
  const ConvergenceStudy s = config::parse_convergence(cfg, overrides(g));
  Run run("convergence", g);
  const std::vector<ErrorTable> tables = convergence_study(s);
  const fs::path out = output_path(g, "convergence.csv");
  run.csv(report::error_table(tables), out);
  run.svg("strong error, model " + s.model.id, "log2 step", "log2 err", report::convergence_plot(tables));
  run.manifest(effective_config(cfg, s.seed, s.threads, s.method, g.allow_brownian), s.seed, s.threads, out);
  std::cout << report::convergence_summary(tables) << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_chaos(const Globals& g) {
  const Json cfg = load_config(g);
  const ChaosStudy s = config::parse_chaos(cfg, overrides(g));
  Run run("chaos", g);
  const ChaosTable table = chaos_study(s);
  const fs::path out = output_path(g, "chaos.csv");
  run.csv(report::chaos_table(table), out);
  run.svg("propagation of chaos, model " + s.model.id, "log2 N", "log2 gap", report::chaos_plot(table));
  run.manifest(effective_config(cfg, s.seed, s.threads, s.method, g.allow_brownian), s.seed, s.threads, out);
  std::cout << report::chaos_summary(table, s) << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_maximal(const Globals& g) {
  const Json cfg = load_config(g);
  const config::MaximalConfig c = config::parse_maximal(cfg, overrides(g));
  Run run("probe-maximal", g);
  std::vector<MaximalProbe> probes;
  for (double h : c.hursts)
    probes.push_back(maximal_inequality_probe(h, c.p, c.horizons, c.paths, c.common.seed, c.grid_points,
                                              c.common.method, c.common.threads));
  const fs::path out = output_path(g, "maximal.csv");
  run.csv(report::maximal_table(probes), out);
  run.svg("maximal functional", "log2 t", "log2 E sup |B|^p", report::maximal_plot(probes));
  run.manifest(effective_config(cfg, c.common.seed, c.common.threads, c.common.method, c.common.allow_brownian),
               c.common.seed, c.common.threads, out);
  std::cout << report::maximal_summary(probes) << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_moments(const Globals& g) {
  const Json cfg = load_config(g);
  const MomentStudy s = config::parse_moments(cfg, overrides(g));
  Run run("probe-moments", g);
  const MomentProbe probe = moment_bound_probe(s);
  const fs::path out = output_path(g, "moments.csv");
  run.csv(report::moment_table(probe), out);
  run.svg("moment bound, model " + s.model.id, "log2 step", "log2 moment", report::moment_plot(probe));
  run.manifest(effective_config(cfg, s.seed, s.threads, s.method, g.allow_brownian), s.seed, s.threads, out);
  std::cout << report::moment_summary(probe) << "wrote " << out.string() << "\n";
  if (probe.any_blowup) {
    std::cerr << "error: moment blow-up (non-finite particle states)\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama particle schemes for delay McKean-Vlasov SDEs driven by fBm", "mvfbm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file or run manifest")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output CSV path");
  app.add_option("--svg", g.svg, "Optional log-log plot");
  app.add_flag("--allow-brownian", g.allow_brownian, "Accept hurst = 0.5");

  FbmFlags fbm_flags;
  CLI::App* fbm = app.add_subcommand("fbm", "Sample fractional Brownian motion paths");
  fbm->add_option("--n", fbm_flags.n, "Increments per path");
  fbm->add_option("--dt", fbm_flags.dt, "Grid step (default 1/n)");
  fbm->add_option("--hurst", fbm_flags.hurst, "Hurst index");
  fbm->add_option("--streams", fbm_flags.streams, "Independent paths");
  fbm->add_option("--method", fbm_flags.method, "cholesky or davies-harte");
  CLI::App* simulate = app.add_subcommand("simulate", "Run the interacting particle scheme once");
  CLI::App* convergence = app.add_subcommand("convergence", "Strong error against a fine reference grid");
  CLI::App* chaos = app.add_subcommand("chaos", "Propagation-of-chaos gap against particle count");
  CLI::App* maximal = app.add_subcommand("probe-maximal", "Scaling of E sup |B^H|^p with the horizon");
  CLI::App* moments = app.add_subcommand("probe-moments", "Moment bound across step sizes");
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fbm) return cmd_fbm(g, fbm_flags);
    if (*simulate) return cmd_simulate(g);
    if (*convergence) return cmd_convergence(g);
    if (*chaos) return cmd_chaos(g);
    if (*maximal) return cmd_maximal(g);
    if (*moments) return cmd_moments(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
