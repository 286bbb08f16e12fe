#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mvfbm/fgn.hpp"
#include "mvfbm/measure.hpp"

namespace mvfbm {

/// alpha(t, x, x_delayed, law_t, law_delayed) written into `out` (length d).
using DriftFn = std::function<void(double t, std::span<const double> x, std::span<const double> x_delayed,
                                   MeasureView law, MeasureView law_delayed, std::span<double> out)>;

/// beta(t, law_t, law_delayed) written into `out` as a row-major d x d matrix.
using DiffusionFn = std::function<void(double t, MeasureView law, MeasureView law_delayed, std::span<double> out)>;

/// xi^i(theta) for theta in [-delay, 0]. `seed` and `particle` key any
/// per-particle randomness; deterministic paths ignore them.
using InitialPathFn =
    std::function<void(double theta, std::uint64_t seed, std::uint64_t particle, std::span<double> out)>;

// Library drift terms. A custom drift is the sum of its terms.

/// coef * integral Phi(|x - y|) (x - y) law(dy), Phi the opinion kernel.
struct KernelInteractionTerm {
  double coef = 1.0;
};
/// coef * x
struct LinearTerm {
  double coef = 1.0;
};
/// Constant vector (a scalar broadcast to every component).
struct ConstantTerm {
  double value = 0.0;
};
/// coef * x_delayed^power, componentwise.
struct DelayPowerTerm {
  double coef = 1.0;
  int power = 1;
};
/// coef * mean(law_delayed)
struct DelayMeanTerm {
  double coef = 1.0;
};
/// coef * mean(law)
struct MeanTerm {
  double coef = 1.0;
};
/// coef * x^power, componentwise. Superlinear powers put the model outside
/// the globally Lipschitz class in the present state.
struct PresentPowerTerm {
  double coef = 1.0;
  int power = 1;
};

using DriftTerm = std::variant<KernelInteractionTerm, LinearTerm, ConstantTerm, DelayPowerTerm, DelayMeanTerm,
                               MeanTerm, PresentPowerTerm>;

DriftFn make_term_drift(std::vector<DriftTerm> terms, std::size_t dim);

struct ConstantDiffusion {
  double sigma = 1.0;  ///< beta = sigma * I
};
/// beta = (sigma0 + sigma1 * m / (1 + m)) * I with m the second moment functional of law_t.
struct MomentDiffusion {
  double sigma0 = 1.0;
  double sigma1 = 0.0;
};
using DiffusionSpec = std::variant<ConstantDiffusion, MomentDiffusion>;

struct AbsPath {};  ///< |theta| in every component
struct ConstantPath {
  double value = 0.0;
};
struct LinearPath {
  double intercept = 0.0;
  double slope = 0.0;
};
/// Constant in theta, drawn per particle: mean + sd * g_i.
struct GaussianPath {
  double mean = 0.0;
  double sd = 1.0;
};
using InitialPathSpec = std::variant<AbsPath, ConstantPath, LinearPath, GaussianPath>;

/// A delay McKean-Vlasov equation instance.
struct ModelSpec {
  std::string id;
  std::size_t dim = 1;
  double delay = 0.125;
  DriftFn drift;
  DiffusionFn diffusion;
  bool constant_diffusion = true;
  /// Polynomial order l of the delayed-state modulus (1 + |x|^l + |y|^l)|x - y|.
  double growth_exponent = 1.0;
  InitialPathFn initial_path;
  /// Hoelder exponent of the initial path.
  double holder_exponent = 1.0;
  bool random_initial_path = false;
  /// True when the drift is globally Lipschitz in the present state.
  bool lipschitz_in_present_state = true;

  void evaluate_initial(double theta, std::uint64_t seed, std::uint64_t particle, std::span<double> out) const;
};

/// Raises ConfigError when H < 1/2 is paired with a measure-dependent diffusion.
void check_hurst_regime(const ModelSpec& model, Hurst hurst);

struct OpinionParams {
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = -1.0;
  double a4 = 1.0;
  double a5 = 1.0;
  double delay = 0.125;
};

/// sin(r - 0.5) for r < 0.5, cos(r + 0.5) for r >= 0.5.
double opinion_kernel(double r);

/// a1 int Phi(|x-y|)(x-y) mu(dy) + a2 x + a3 x_del^3 + a4 mean(mu_del).
double opinion_drift(double t, double x, double x_delayed, MeasureView law, MeasureView law_delayed,
                     const OpinionParams& params);

inline double opinion_diffusion(const OpinionParams& params) noexcept { return params.a5; }

/// |theta| on [-delay, 0].
double opinion_initial_path(double theta, double delay = 0.125);

ModelSpec make_opinion_model(const OpinionParams& params = {});
ModelSpec make_zero_drift_model(double beta, double initial_value = 0.0, std::size_t dim = 1, double delay = 0.125);
/// alpha = a x + b, beta constant.
ModelSpec make_linear_model(double a, double b, double beta = 1.0, double initial_value = 1.0,
                            double delay = 0.125);
ModelSpec make_custom_model(std::string id, std::vector<DriftTerm> terms, DiffusionSpec diffusion,
                            InitialPathSpec initial_path, double delay, std::size_t dim = 1);

InitialPathFn make_initial_path(const InitialPathSpec& spec, double delay, std::size_t dim);
DiffusionFn make_diffusion(const DiffusionSpec& spec, std::size_t dim);

}  // namespace mvfbm
