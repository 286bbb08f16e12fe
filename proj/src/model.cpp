#include "mvfbm/model.hpp"

#include <algorithm>
#include <cmath>

#include "mvfbm/errors.hpp"
#include "mvfbm/rng.hpp"

namespace mvfbm {

namespace {

double ipow(double x, int power) {
  double r = 1.0;
  for (int k = 0; k < power; ++k) r *= x;
  return r;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// (1/N) sum_j Phi(|x - y_j|)(x - y_j), ascending j.
void kernel_interaction(std::span<const double> x, MeasureView law, std::span<double> out) {
  const std::size_t d = x.size();
  const std::size_t n = law.size();
  const double* y = law.data().data();
  if (d == 1) {
    const double x0 = x[0];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = x0 - y[j];
      acc += opinion_kernel(std::abs(diff)) * diff;
    }
    out[0] = acc / static_cast<double>(n);
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) sq += (x[c] - y[j * d + c]) * (x[c] - y[j * d + c]);
    const double phi = opinion_kernel(std::sqrt(sq));
    for (std::size_t c = 0; c < d; ++c) out[c] += phi * (x[c] - y[j * d + c]);
  }
  for (double& v : out) v /= static_cast<double>(n);
}

}  // namespace

double opinion_kernel(double r) {
  if (r < 0.0) throw DomainError("opinion_kernel: distance must be non-negative");
  return r < 0.5 ? std::sin(r - 0.5) : std::cos(r + 0.5);
}

double opinion_drift(double /*t*/, double x, double x_delayed, MeasureView law, MeasureView law_delayed,
                     const OpinionParams& params) {
  if (law.dim() != 1 || law_delayed.dim() != 1) throw UsageError("opinion_drift is defined for d = 1 only");
  const std::vector<double> interaction = integrate(
      [x](std::span<const double> y, std::span<double> out) {
        const double diff = x - y[0];
        out[0] = opinion_kernel(std::abs(diff)) * diff;
      },
      law, 1);
  const double delayed_mean = mean(law_delayed)[0];
  return params.a1 * interaction[0] + params.a2 * x + params.a3 * (x_delayed * x_delayed * x_delayed) +
         params.a4 * delayed_mean;
}

double opinion_initial_path(double theta, double delay) {
  if (theta < -delay || theta > 0.0) throw DomainError("initial path is defined on [-delay, 0]");
  return std::abs(theta);
}

DriftFn make_term_drift(std::vector<DriftTerm> terms, std::size_t dim) {
  return [terms = std::move(terms), dim](double, std::span<const double> x, std::span<const double> x_delayed,
                                         MeasureView law, MeasureView law_delayed, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> scratch(dim);
    for (const DriftTerm& term : terms) {
      std::visit(Overloaded{
                     [&](const KernelInteractionTerm& k) {
                       kernel_interaction(x, law, scratch);
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * scratch[c];
                     },
                     [&](const LinearTerm& k) {
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * x[c];
                     },
                     [&](const ConstantTerm& k) {
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.value;
                     },
                     [&](const DelayPowerTerm& k) {
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * ipow(x_delayed[c], k.power);
                     },
                     [&](const DelayMeanTerm& k) {
                       const std::vector<double> m = mean(law_delayed);
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * m[c];
                     },
                     [&](const MeanTerm& k) {
                       const std::vector<double> m = mean(law);
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * m[c];
                     },
                     [&](const PresentPowerTerm& k) {
                       for (std::size_t c = 0; c < dim; ++c) out[c] += k.coef * ipow(x[c], k.power);
                     },
                 },
                 term);
    }
  };
}

DiffusionFn make_diffusion(const DiffusionSpec& spec, std::size_t dim) {
  return std::visit(
      Overloaded{
          [dim](const ConstantDiffusion& c) -> DiffusionFn {
            return [sigma = c.sigma, dim](double, MeasureView, MeasureView, std::span<double> out) {
              std::fill(out.begin(), out.end(), 0.0);
              for (std::size_t c = 0; c < dim; ++c) out[c * dim + c] = sigma;
            };
          },
          [dim](const MomentDiffusion& m) -> DiffusionFn {
            return [m, dim](double, MeasureView law, MeasureView, std::span<double> out) {
              const double w = moment(law, 2.0);
              const double sigma = m.sigma0 + m.sigma1 * w / (1.0 + w);
              std::fill(out.begin(), out.end(), 0.0);
              for (std::size_t c = 0; c < dim; ++c) out[c * dim + c] = sigma;
            };
          },
      },
      spec);
}

InitialPathFn make_initial_path(const InitialPathSpec& spec, double delay, std::size_t dim) {
  auto check = [delay](double theta) {
    if (theta < -delay - 1e-12 * delay || theta > 0.0)
      throw DomainError("initial path is defined on [-delay, 0]");
  };
  (void)dim;
  return std::visit(
      Overloaded{
          [check](const AbsPath&) -> InitialPathFn {
            return [check](double theta, std::uint64_t, std::uint64_t, std::span<double> out) {
              check(theta);
              std::fill(out.begin(), out.end(), std::abs(theta));
            };
          },
          [check](const ConstantPath& p) -> InitialPathFn {
            return [check, p](double theta, std::uint64_t, std::uint64_t, std::span<double> out) {
              check(theta);
              std::fill(out.begin(), out.end(), p.value);
            };
          },
          [check](const LinearPath& p) -> InitialPathFn {
            return [check, p](double theta, std::uint64_t, std::uint64_t, std::span<double> out) {
              check(theta);
              std::fill(out.begin(), out.end(), p.intercept + p.slope * theta);
            };
          },
          [check](const GaussianPath& p) -> InitialPathFn {
            return [check, p](double theta, std::uint64_t seed, std::uint64_t particle, std::span<double> out) {
              check(theta);
              const rng::NormalStream stream(seed, particle, rng::Domain::kInitialPath);
              for (std::size_t c = 0; c < out.size(); ++c) out[c] = p.mean + p.sd * stream.normal(c);
            };
          },
      },
      spec);
}

void ModelSpec::evaluate_initial(double theta, std::uint64_t seed, std::uint64_t particle,
                                 std::span<double> out) const {
  initial_path(theta, seed, particle, out);
}

void check_hurst_regime(const ModelSpec& model, Hurst hurst) {
  if (hurst.rough() && !model.constant_diffusion)
    throw ConfigError("model '" + model.id +
                      "': for H < 1/2 the diffusion must not depend on the law (constant diffusion required)");
}

ModelSpec make_custom_model(std::string id, std::vector<DriftTerm> terms, DiffusionSpec diffusion,
                            InitialPathSpec initial_path, double delay, std::size_t dim) {
  if (!(delay > 0.0)) throw ConfigError("model delay must be positive");
  if (dim == 0) throw ConfigError("model dimension must be >= 1");
  ModelSpec m;
  m.id = std::move(id);
  m.dim = dim;
  m.delay = delay;
  double l = 1.0;
  bool lipschitz = true;
  for (const DriftTerm& t : terms) {
    if (const auto* dp = std::get_if<DelayPowerTerm>(&t)) {
      if (dp->power < 0) throw ConfigError("delay-power exponent must be >= 0");
      l = std::max(l, static_cast<double>(dp->power - 1));
    }
    if (const auto* pp = std::get_if<PresentPowerTerm>(&t)) {
      if (pp->power < 0) throw ConfigError("present-power exponent must be >= 0");
      if (pp->power > 1 && pp->coef != 0.0) lipschitz = false;
    }
  }
  m.growth_exponent = l;
  m.lipschitz_in_present_state = lipschitz;
  m.drift = make_term_drift(std::move(terms), dim);
  m.constant_diffusion = std::holds_alternative<ConstantDiffusion>(diffusion);
  m.diffusion = make_diffusion(diffusion, dim);
  m.random_initial_path = std::holds_alternative<GaussianPath>(initial_path);
  m.initial_path = make_initial_path(initial_path, delay, dim);
  m.holder_exponent = 1.0;
  return m;
}

ModelSpec make_opinion_model(const OpinionParams& p) {
  ModelSpec m = make_custom_model(
      "opinion",
      {KernelInteractionTerm{p.a1}, LinearTerm{p.a2}, DelayPowerTerm{p.a3, 3}, DelayMeanTerm{p.a4}},
      ConstantDiffusion{p.a5}, AbsPath{}, p.delay);
  m.growth_exponent = 2.0;
  return m;
}

ModelSpec make_zero_drift_model(double beta, double initial_value, std::size_t dim, double delay) {
  return make_custom_model("zero", {}, ConstantDiffusion{beta}, ConstantPath{initial_value}, delay, dim);
}

ModelSpec make_linear_model(double a, double b, double beta, double initial_value, double delay) {
  return make_custom_model("linear", {LinearTerm{a}, ConstantTerm{b}}, ConstantDiffusion{beta},
                           ConstantPath{initial_value}, delay);
}

}  // namespace mvfbm
