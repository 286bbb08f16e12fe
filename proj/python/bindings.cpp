#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "mvfbm/config.hpp"
#include "mvfbm/errors.hpp"
#include "mvfbm/experiments.hpp"
#include "mvfbm/fgn.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/model.hpp"
#include "mvfbm/solver.hpp"
#include "mvfbm/version.hpp"

namespace py = pybind11;
using namespace mvfbm;
using config::Json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

/// A (N,) or (N, d) array as a measure view; the array must outlive the view.
MeasureView as_measure(const Array& a) {
  if (a.ndim() == 1) return {std::span<const double>(a.data(), static_cast<std::size_t>(a.shape(0))), 1};
  if (a.ndim() != 2) throw UsageError("samples must be a 1-D or 2-D array");
  return {std::span<const double>(a.data(), static_cast<std::size_t>(a.size())), static_cast<std::size_t>(a.shape(1))};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

py::dict fit_dict(const SlopeFit& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["slope_stderr"] = f.slope_stderr;
  d["ci"] = py::make_tuple(f.ci_low, f.ci_high);
  d["points"] = f.points;
  return d;
}

NoiseBlock sample_block(std::size_t n, double dt, double hurst, std::uint64_t seed, std::uint64_t stream,
                        const std::string& method) {
  return FgnSampler(n, dt, Hurst(hurst), parse_fgn_method(method)).sample(seed, stream);
}

py::dict simulate(const std::string& cfg_text) {
  const config::SimulateConfig c = config::parse_simulate(parse_json(cfg_text));
  const EnsembleTrajectory traj = [&] {
    py::gil_scoped_release release;
    return run(c.model, c.grid, c.particles, Hurst(c.hurst), c.common.seed, {c.common.method, c.common.threads});
  }();
  const std::size_t rows = c.grid.rows();
  py::array_t<double> states(std::vector<py::ssize_t>{static_cast<py::ssize_t>(rows),
                                                      static_cast<py::ssize_t>(traj.particles),
                                                      static_cast<py::ssize_t>(traj.dim)},
                             traj.states.data());
  std::vector<double> t(rows);
  for (std::size_t r = 0; r < rows; ++r)
    t[r] = c.grid.time(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(c.grid.delay_steps()));
  py::dict out;
  out["t"] = to_array(t);
  out["states"] = states;
  out["step"] = c.grid.step();
  out["delay_steps"] = c.grid.delay_steps();
  out["finite"] = traj.all_finite();
  return out;
}

py::list convergence(const std::string& cfg_text) {
  const ConvergenceStudy s = config::parse_convergence(parse_json(cfg_text));
  std::vector<ErrorTable> tables;
  {
    py::gil_scoped_release release;
    tables = convergence_study(s);
  }
  py::list out;
  for (const ErrorTable& t : tables) {
    py::dict d;
    d["hurst"] = t.hurst;
    py::list rows;
    for (const ErrorRow& r : t.rows)
      rows.append(py::dict(py::arg("step") = r.step, py::arg("err") = r.err, py::arg("repeats") = r.repeats,
                           py::arg("std_error") = r.std_error, py::arg("degenerate") = r.degenerate));
    d["rows"] = rows;
    d["fit"] = fit_dict(t.fit);
    d["fit_valid"] = t.fit_valid;
    d["theoretical_exponent"] = t.theoretical_exponent;
    d["strictly_decreasing"] = t.strictly_decreasing;
    d["warnings"] = t.warnings;
    out.append(d);
  }
  return out;
}

py::dict chaos(const std::string& cfg_text) {
  const ChaosStudy s = config::parse_chaos(parse_json(cfg_text));
  ChaosTable t;
  {
    py::gil_scoped_release release;
    t = chaos_study(s);
  }
  py::list rows;
  for (const ChaosRow& r : t.rows)
    rows.append(py::dict(py::arg("N") = r.particles, py::arg("gap") = r.gap, py::arg("std_error") = r.std_error,
                         py::arg("repeats") = r.repeats));
  py::dict d;
  d["rows"] = rows;
  d["fit"] = fit_dict(t.fit);
  d["fit_valid"] = t.fit_valid;
  d["non_increasing"] = t.non_increasing;
  d["lambda"] = t.lambda;
  return d;
}

py::list probe_maximal(const std::string& cfg_text) {
  const config::MaximalConfig c = config::parse_maximal(parse_json(cfg_text));
  std::vector<MaximalProbe> probes;
  {
    py::gil_scoped_release release;
    for (double h : c.hursts)
      probes.push_back(maximal_inequality_probe(h, c.p, c.horizons, c.paths, c.common.seed, c.grid_points,
                                                c.common.method, c.common.threads));
  }
  py::list out;
  for (const MaximalProbe& p : probes) {
    py::list rows;
    for (const MaximalRow& r : p.rows)
      rows.append(py::dict(py::arg("t") = r.horizon, py::arg("estimate") = r.estimate,
                           py::arg("std_error") = r.std_error));
    out.append(py::dict(py::arg("hurst") = p.hurst, py::arg("p") = p.p, py::arg("rows") = rows,
                        py::arg("fit") = fit_dict(p.fit), py::arg("expected_slope") = p.expected_slope));
  }
  return out;
}

py::dict probe_moments(const std::string& cfg_text) {
  const MomentStudy s = config::parse_moments(parse_json(cfg_text));
  MomentProbe p;
  {
    py::gil_scoped_release release;
    p = moment_bound_probe(s);
  }
  py::list rows;
  for (const MomentRow& r : p.rows)
    rows.append(py::dict(py::arg("step") = r.step, py::arg("estimate") = r.estimate,
                         py::arg("std_error") = r.std_error, py::arg("blowup") = r.blowup));
  return py::dict(py::arg("rows") = rows, py::arg("ratio") = p.ratio, py::arg("bounded") = p.bounded,
                  py::arg("any_blowup") = p.any_blowup);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Euler-Maruyama particle schemes for delay McKean-Vlasov SDEs driven by fractional Brownian motion";
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<UsageError> usage(m, "UsageError", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", base.ptr());
  static py::exception<IoError> io(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UsageError& e) {
      PyErr_SetString(usage.ptr(), e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    } catch (const IoError& e) {
      PyErr_SetString(io.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def(
      "fgn",
      [](std::size_t n, double dt, double hurst, std::uint64_t seed, std::uint64_t stream, const std::string& method) {
        return to_array(sample_block(n, dt, hurst, seed, stream, method).increments);
      },
      py::arg("n"), py::arg("dt"), py::arg("hurst"), py::arg("seed") = config::kDefaultSeed, py::arg("stream") = 0,
      py::arg("method") = "davies-harte", "Fractional Gaussian noise increments of one stream.");
  m.def(
      "fbm_path",
      [](std::size_t n, double dt, double hurst, std::uint64_t seed, std::uint64_t stream, const std::string& method) {
        return to_array(path_from_increments(sample_block(n, dt, hurst, seed, stream, method)));
      },
      py::arg("n"), py::arg("dt"), py::arg("hurst"), py::arg("seed") = config::kDefaultSeed, py::arg("stream") = 0,
      py::arg("method") = "davies-harte", "fBm path at t_k = k dt, k = 0..n, starting at 0.");
  m.def(
      "fgn_autocovariance",
      [](std::size_t lag, double dt, double hurst) { return fgn_autocovariance(lag, dt, Hurst(hurst)); },
      py::arg("lag"), py::arg("dt"), py::arg("hurst"));
  m.def(
      "coarsen", [](const Array& inc, std::size_t factor) {
        return to_array(coarsen(std::span<const double>(inc.data(), static_cast<std::size_t>(inc.size())), factor));
      },
      py::arg("increments"), py::arg("factor"), "Block sums of consecutive increments.");

  m.def(
      "moment", [](const Array& x, double q) { return moment(as_measure(x), q); }, py::arg("samples"),
      py::arg("q") = 2.0);
  m.def(
      "wasserstein",
      [](const Array& x, const Array& y, double p) {
        const MeasureView a = as_measure(x), b = as_measure(y);
        return a.dim() == 1 ? wasserstein_1d(a, b, p) : wasserstein_assignment(a, b, p);
      },
      py::arg("x"), py::arg("y"), py::arg("p") = 2.0, "Exact W_p between equal-size empirical measures.");
  m.def("opinion_kernel", &opinion_kernel, py::arg("r"));
  m.def(
      "fit_log_log",
      [](const std::vector<double>& x, const std::vector<double>& y) { return fit_dict(fit_log_log(x, y)); },
      py::arg("x"), py::arg("y"));

  m.def("_simulate", &simulate);
  m.def("_convergence", &convergence);
  m.def("_chaos", &chaos);
  m.def("_probe_maximal", &probe_maximal);
  m.def("_probe_moments", &probe_moments);
}
