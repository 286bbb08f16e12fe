// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../unit/oracles.hpp"
#include "mvfbm/config.hpp"
#include "mvfbm/experiments.hpp"
#include "mvfbm/fgn.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/model.hpp"
#include "mvfbm/report.hpp"
#include "mvfbm/rng.hpp"
#include "mvfbm/solver.hpp"

namespace fs = std::filesystem;
using namespace mvfbm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<double> normals(std::uint64_t seed, std::size_t count) {
  std::vector<double> v(count);
  rng::NormalStream(seed, 0, rng::Domain::kTest).fill_normal(v);
  return v;
}

// 1. Circulant embedding and Cholesky reproduce the fGn covariance.
Outcome fgn_exactness() {
  double worst_dh = 0.0, worst_chol = 0.0;
  for (double h : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (std::size_t n = 1; n <= 64; ++n) {
      const double dt = 1.0 / static_cast<double>(n);
      const CirculantSpectrum spec = circulant_spectrum(n, dt, Hurst(h));
      const std::size_t m = spec.m;
      std::vector<double> cols(m * n), unit(m, 0.0), out(n);
      for (std::size_t j = 0; j < m; ++j) {
        unit[j] = 1.0;
        davies_harte_transform(spec, unit, out);
        unit[j] = 0.0;
        std::copy(out.begin(), out.end(), cols.begin() + static_cast<std::ptrdiff_t>(j * n));
      }
      const std::vector<double> l = fgn_cholesky_factor(n, dt, Hurst(h));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
          const double gamma = oracle::increment_cov(a, b, dt, h);
          double dh = 0.0, ch = 0.0;
          for (std::size_t j = 0; j < m; ++j) dh += cols[j * n + a] * cols[j * n + b];
          for (std::size_t c = 0; c <= b; ++c) ch += l[a * n + c] * l[b * n + c];
          worst_dh = std::max(worst_dh, std::abs(dh - gamma));
          worst_chol = std::max(worst_chol, std::abs(ch - gamma));
        }
    }
  return {worst_dh < 1e-8 && worst_chol < 1e-10,
          "max |embedding cov - Gamma| = " + fmt(worst_dh) + " (tol 1e-8), max |LL^T - Gamma| = " + fmt(worst_chol) +
              " (tol 1e-10)"};
}

// 2. Assignment-based Wasserstein against N! enumeration, and 1-D sorting against assignment.
Outcome wasserstein_oracle() {
  double worst_enum = 0.0, worst_1d = 0.0;
  std::size_t instances = 0;
  for (std::uint64_t seed = 0; instances < 1200; ++seed) {
    const std::size_t n = 1 + seed % 6, d = 1 + (seed / 6) % 3;
    const double p = seed % 2 == 0 ? 1.0 : 2.0;
    const std::vector<double> g = normals(seed, 2 * n * d);
    const std::vector<double> x(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n * d));
    const std::vector<double> y(g.begin() + static_cast<std::ptrdiff_t>(n * d), g.end());
    const double a = wasserstein_assignment(MeasureView(x, d), MeasureView(y, d), p);
    worst_enum = std::max(worst_enum, std::abs(a - oracle::wasserstein_bruteforce(x, y, d, p)));
    ++instances;
  }
  std::size_t one_d = 0;
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u, 32u, 64u, 100u, 128u, 200u, 256u})
    for (double p : {1.0, 2.0}) {
      const std::vector<double> g = normals(10000 + n, 2 * n);
      const std::vector<double> x(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n));
      const std::vector<double> y(g.begin() + static_cast<std::ptrdiff_t>(n), g.end());
      worst_1d = std::max(worst_1d, std::abs(wasserstein_1d(MeasureView(x, 1), MeasureView(y, 1), p) -
                                             wasserstein_assignment(MeasureView(x, 1), MeasureView(y, 1), p)));
      ++one_d;
    }
  return {worst_enum < 1e-12 && worst_1d < 1e-12,
          std::to_string(instances) + " enumeration instances, max diff " + fmt(worst_enum) + "; " +
              std::to_string(one_d) + " 1-D instances, max diff " + fmt(worst_1d) + " (tol 1e-12)"};
}

// 3. W2 to the Dirac cloud at the origin equals the second moment functional.
Outcome dirac_identity() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const std::size_t n = 1 + s % 64, d = 1 + s % 3;
    const std::vector<double> x = normals(50000 + s, n * d);
    const std::vector<double> zero(x.size(), 0.0);
    const double w = wasserstein_assignment(MeasureView(x, d), MeasureView(zero, d), 2.0);
    worst = std::max(worst, std::abs(w - moment(MeasureView(x, d), 2.0)));
  }
  return {worst < 1e-12, "500 measures, max |W2(mu, delta_0) - moment_2(mu)| = " + fmt(worst) + " (tol 1e-12)"};
}

// 4. Zero drift, unit diffusion, zero initial path: the scheme returns the fBm path exactly.
Outcome solvable_model() {
  const ModelSpec model = make_zero_drift_model(1.0, 0.0);
  const TimeGrid fine = TimeGrid::dyadic(0.125, 10, 1.0);
  const std::size_t n = 16;
  bool exact = true;
  for (double h : {0.3, 0.7}) {
    const NoiseField noise =
        generate_noise(n, fine.horizon_steps(), fine.step(), Hurst(h), 17, FgnMethod::kDaviesHarte);
    const EnsembleTrajectory traj = run_with_noise(model, fine, n, Hurst(h), 17, noise);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> path = path_from_increments(noise.stream(i));
      for (std::size_t k = 0; k < path.size(); ++k)
        exact = exact && traj.state(i, static_cast<std::ptrdiff_t>(k))[0] == path[k];
    }
  }
  double worst = 0.0;
  std::size_t factors = 0;
  for (double h : {0.3, 0.7})
    for (std::size_t f = 2; f <= fine.delay_steps(); f *= 2) {
      const auto [a, b] = coupled_pair_run(model, fine, f, n, Hurst(h), 23);
      worst = std::max({worst, strong_error(a, b), strong_error_sup(a, b)});
      ++factors;
    }
  return {exact && worst == 0.0, std::string("Z(t_k) bit-equal to the fBm path: ") + (exact ? "yes" : "no") +
                                     "; max coupled strong error over " + std::to_string(factors) +
                                     " (H, factor) pairs = " + fmt(worst)};
}

std::string describe(const ErrorTable& t) {
  std::string s = "H=" + fmt(t.hurst, 2) + " slope " + fmt(t.fit.slope) + " [" + fmt(t.fit.ci_low) + ", " +
                  fmt(t.fit.ci_high) + "], errors";
  for (const ErrorRow& r : t.rows) s += " " + fmt(r.err, 3);
  s += t.strictly_decreasing ? " (decreasing)" : " (not decreasing)";
  return s;
}

ConvergenceStudy opinion_study(std::vector<double> hursts) {
  ConvergenceStudy s;
  s.model = make_opinion_model();
  s.hursts = std::move(hursts);
  s.horizon = 1.0;
  s.fine_level = 14;
  s.coarse_levels = {7, 8, 9, 10};
  s.particles = 200;
  s.repeats = 8;
  s.seed = config::kDefaultSeed;
  return s;
}

// 5. Strong rate for H > 1/2 on the opinion model.
Outcome rate_smooth() {
  const std::vector<ErrorTable> tables = convergence_study(opinion_study({0.6, 0.9}));
  bool pass = true;
  std::string detail;
  for (const ErrorTable& t : tables) {
    pass = pass && t.fit_valid && std::abs(t.fit.slope - t.hurst) <= 0.2 && t.strictly_decreasing;
    detail += (detail.empty() ? "" : "; ") + describe(t);
  }
  return {pass, detail + " (need |slope - H| <= 0.2)"};
}

// 6. Terminal-time rate for H < 1/2.
Outcome rate_rough() {
  const std::vector<ErrorTable> tables = convergence_study(opinion_study({0.3}));
  const ErrorTable& t = tables.front();
  return {t.fit_valid && std::abs(t.fit.slope - 0.3) <= 0.2, describe(t) + " (need |slope - 0.3| <= 0.2)"};
}

// 7. Moment bound across step sizes, and a flagged blow-up for a cubic present-state drift.
Outcome moment_bound() {
  MomentStudy s;
  s.model = make_opinion_model();
  s.levels = {5, 6, 7, 8, 9};
  s.particles = 200;
  s.p = 4.0;
  s.repeats = 4;
  s.seed = config::kDefaultSeed;
  const MomentProbe probe = moment_bound_probe(s);

  MomentStudy control = s;
  control.model = make_custom_model("cubic-present", {PresentPowerTerm{-1.0, 3}}, ConstantDiffusion{1.0},
                                    ConstantPath{5.0}, 0.125);
  control.levels = {3};
  control.repeats = 1;
  bool flagged = false;
  std::string control_note;
  try {
    const MomentProbe c = moment_bound_probe(control);
    flagged = c.any_blowup && c.rows.front().blowup;
    control_note = flagged ? "blow-up flagged at step 2^-3" : "no blow-up at step 2^-3";
  } catch (const std::exception& e) {
    control_note = std::string("control crashed: ") + e.what();
  }
  return {probe.bounded && flagged,
          "opinion max/min ratio " + fmt(probe.ratio) + " (< 2), blow-up " + (probe.any_blowup ? "yes" : "no") +
              "; negative control: " + control_note};
}

// 8. E sup |B^H|^p scales like t^{pH}.
Outcome maximal_scaling() {
  const std::vector<double> horizons{0.25, 0.5, 1.0, 2.0, 4.0};
  bool pass = true;
  std::string detail;
  for (double h : {0.3, 0.7}) {
    const MaximalProbe m = maximal_inequality_probe(h, 2.0, horizons, 10000, config::kDefaultSeed);
    pass = pass && std::abs(m.fit.slope - m.expected_slope) <= 0.15 * m.expected_slope;
    detail += (detail.empty() ? "" : "; ") + std::string("H=") + fmt(h, 2) + " slope " + fmt(m.fit.slope) +
              " vs pH " + fmt(m.expected_slope) + " (tol " + fmt(0.15 * m.expected_slope, 3) + ")";
  }
  return {pass, detail};
}

// 9. The gap to a larger shared-noise system shrinks with N.
Outcome chaos_trend() {
  ChaosStudy s;
  s.model = make_opinion_model();
  s.grid = TimeGrid(0.125, 16, 1.0);
  s.particle_counts = {32, 64, 128, 256};
  s.reference_particles = 512;
  s.hurst = 0.7;
  s.repeats = 16;
  s.seed = config::kDefaultSeed;
  const ChaosTable t = chaos_study(s);
  std::string gaps;
  for (const ChaosRow& r : t.rows) gaps += " " + std::to_string(r.particles) + ":" + fmt(r.gap, 3);
  return {t.non_increasing && t.fit_valid && t.fit.slope < 0.0,
          "gaps" + gaps + ", slope " + fmt(t.fit.slope) + ", non-increasing within 1.1x: " +
              (t.non_increasing ? "yes" : "no")};
}

// 10. Byte-identical CSVs when each subcommand is replayed from its manifest at 1, 2 and 8 threads.
struct Determinism {
  fs::path cli;
  fs::path work;

  int run(const std::string& args) const {
    const std::string cmd = "\"" + cli.string() + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
  }

  Outcome operator()() const {
    fs::create_directories(work);
    struct Case {
      std::string sub;
      std::string config;
      int expected_exit = 0;
    };
    const std::string opinion = R"("model": {"id": "opinion"})";
    const std::vector<Case> cases{
        {"fbm", R"({"n": 1000, "hurst": 0.3, "streams": 4})"},
        {"simulate", "{" + opinion + R"(, "M": 16, "T": 1, "N": 64, "hurst": 0.7})"},
        {"convergence", "{" + opinion + R"(, "N": 32, "hurst": [0.6, 0.3], "fine_level": 9,
                                            "coarse_levels": [5, 6, 7], "repeats": 3})"},
        {"chaos", "{" + opinion + R"(, "M": 8, "T": 0.5, "N_list": [8, 16], "N_ref": 32, "repeats": 3})"},
        {"probe-maximal", R"({"hurst": [0.7], "t_list": [0.25, 4], "paths": 10000, "grid_points": 64})"},
        {"probe-moments", "{" + opinion + R"(, "levels": [5, 6], "N": 32, "repeats": 2})"},
    };
    std::size_t identical = 0;
    std::string failures;
    for (const Case& c : cases) {
      const fs::path cfg = work / (c.sub + ".json");
      report::write_text(cfg, c.config + "\n");
      const fs::path first = work / (c.sub + "_t1.csv");
      bool ok = run("--config \"" + cfg.string() + "\" --threads 1 --out \"" + first.string() + "\" " + c.sub) ==
                c.expected_exit;
      const std::string reference = slurp(first);
      for (int threads : {2, 8}) {
        const fs::path again = work / (c.sub + "_t" + std::to_string(threads) + ".csv");
        ok = ok && run("--config \"" + first.string() + ".manifest.json\" --threads " + std::to_string(threads) +
                       " --out \"" + again.string() + "\" " + c.sub) == c.expected_exit;
        ok = ok && !reference.empty() && slurp(again) == reference;
      }
      if (ok) {
        ++identical;
      } else {
        failures += " " + c.sub;
      }
    }
    return {identical == cases.size(), std::to_string(identical) + "/" + std::to_string(cases.size()) +
                                           " subcommands byte-identical across threads {1, 2, 8}" +
                                           (failures.empty() ? "" : "; differing:" + failures)};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mvfbm acceptance suite"};
  std::string workdir = (fs::temp_directory_path() / "mvfbm_acceptance").string();
  std::string cli;
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for CLI runs");
  app.add_option("--cli", cli, "Path to the mvfbm executable")->required();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "fGn exactness", 5, fgn_exactness},
      {2, "Wasserstein oracle equivalence", 30, wasserstein_oracle},
      {3, "W2 to the Dirac cloud equals the moment", 5, dirac_identity},
      {4, "scheme exactness on the solvable model", 5, solvable_model},
      {5, "strong rate H in {0.6, 0.9}", 1200, rate_smooth},
      {6, "terminal strong rate H = 0.3", 600, rate_rough},
      {7, "moment boundedness and negative control", 300, moment_bound},
      {8, "maximal functional scaling", 180, maximal_scaling},
      {9, "propagation-of-chaos trend", 600, chaos_trend},
      {10, "determinism across thread counts", 300, Determinism{cli, workdir}},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " ["
              << fmt(secs, 3) << " s, budget " << fmt(c.budget_seconds, 4) << " s" << (in_time ? "" : ", OVER BUDGET")
              << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion/criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
