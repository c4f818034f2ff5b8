#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsco/core.hpp"
#include "rsco/domain.hpp"
#include "rsco/rng.hpp"

namespace rsco {

enum class Family { linear_loss, quadratic, scaled_quadratic, abs_loss, spike_1d, product_hypercube };

std::string_view to_string(Family family) noexcept;
/// Throws InvalidArgument for unknown names.
Family family_from_string(std::string_view name);

enum class SpikeVariant { D1, D1prime };

std::string_view to_string(SpikeVariant variant) noexcept;
SpikeVariant spike_variant_from_string(std::string_view name);

/// Immutable data shared by every function drawn from one quadratic-type
/// distribution: the curvature spectrum (empty for the scaled family) and the
/// center the quadratic is anchored at.
struct QuadraticShape {
  Vector spectrum;
  Vector center;

  bool operator==(const QuadraticShape& other) const {
    return spectrum.size() == other.spectrum.size() && center.size() == other.center.size() &&
           spectrum == other.spectrum && center == other.center;
  }
};

/// One loss function drawn from a FunctionDistribution (or planted by an
/// adversary). A value type: copies are cheap, equal functions compare equal.
///
/// Forms, with z = w + shift:
///   linear            f(w) = -<z, x>
///   quadratic         f(w) = 1/2 sum_j a_j (z_j - c_j)^2 - <x, z - c>
///   scaled_quadratic  f(w) = -1/2 s ||z - c||^2
///   norm              f(w) = ||z - x||
/// and every form adds the linear tilt <tilt, w> when a tilt is present.
class SampleFunction {
 public:
  enum class Form { linear, quadratic, scaled_quadratic, norm };

  static SampleFunction linear(Vector x);
  /// Constant-gradient function f(w) = <g, w>.
  static SampleFunction constant_gradient(const Vector& g) { return linear(-g); }
  static SampleFunction quadratic(std::shared_ptr<const QuadraticShape> shape, Vector x);
  static SampleFunction scaled_quadratic(std::shared_ptr<const QuadraticShape> shape, double scale);
  static SampleFunction norm(Vector x);

  Form form() const noexcept { return form_; }
  Eigen::Index dim() const noexcept;
  /// The drawn data point x (linear, quadratic, norm forms).
  const Vector& data() const noexcept { return x_; }
  /// The drawn scale s (scaled_quadratic form).
  double scale() const noexcept { return scale_; }
  const Vector& shift() const noexcept { return shift_; }
  const Vector& tilt() const noexcept { return tilt_; }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;
  /// Writes the gradient at w into out (size dim()). Allocation free.
  void gradient_into(const Vector& w, std::span<double> out) const;

  /// w -> f(w + u). Shifts compose additively.
  SampleFunction shifted(const Vector& u) const;
  /// w -> f(w) + <t, w>. Tilts compose additively.
  SampleFunction tilted(const Vector& t) const;
  /// Same function with the drawn data point replaced.
  SampleFunction with_data(Vector x) const;

  bool operator==(const SampleFunction& other) const;

 private:
  SampleFunction() = default;

  Form form_ = Form::linear;
  Vector x_;
  double scale_ = 0.0;
  std::shared_ptr<const QuadraticShape> shape_;
  Vector shift_;
  Vector tilt_;
};

/// Regularity constants a distribution declares about itself. sigma bounds the
/// spectral norm of the gradient covariance at every feasible w; the optional
/// ones are absent when the family does not have them.
struct DeclaredConstants {
  double sigma = 0.0;
  std::optional<double> beta_bar;       // population smoothness
  std::optional<double> lipschitz_bar;  // population Lipschitz constant
  std::optional<double> noncentral_g;   // sup_w sup_|v|=1 E[(v . grad f(w))^2] <= G^2
};

struct LinearLossParams {
  Vector mean;
  double noise_sd = 0.0;
};
struct QuadraticParams {
  std::shared_ptr<const QuadraticShape> shape;
  double noise_sd = 0.0;
};
struct ScaledQuadraticParams {
  std::shared_ptr<const QuadraticShape> shape;
  double scale_mean = 0.0;
  double scale_sd = 0.0;
};
struct AbsLossParams {
  Vector center;
  double spread = 0.0;
  double spread_prob = 0.0;
};
struct SpikeParams {
  SpikeVariant variant = SpikeVariant::D1;
  double sigma = 1.0;
  double epsilon = 0.0;
  double half_width = 1.0;
};
struct ProductInstanceParams {
  Eigen::VectorXi nu;  // entries in {-1, +1}
  double p = 0.0;
  double sigma = 1.0;
};

using FamilyParams = std::variant<LinearLossParams, QuadraticParams, ScaledQuadraticParams, AbsLossParams,
                                  SpikeParams, ProductInstanceParams>;

struct PopulationMinimum {
  double value = 0.0;
  Vector argmin;
};

/// A sampleable distribution p* over loss functions on a feasible domain with
/// closed-form population risk and gradient. Immutable after construction.
class FunctionDistribution {
 public:
  FunctionDistribution(Family family, FamilyParams params, FeasibleDomain domain, DeclaredConstants constants);

  Family family() const noexcept { return family_; }
  Eigen::Index dim() const noexcept { return domain_.dim(); }
  const FeasibleDomain& domain() const noexcept { return domain_; }
  const DeclaredConstants& constants() const noexcept { return constants_; }
  const FamilyParams& params() const noexcept { return params_; }

  SampleFunction draw(CounterRng& rng) const;

  double population_risk(const Vector& w) const;
  Vector population_gradient(const Vector& w) const;
  /// Closed-form min over the domain. Throws UnsupportedFamily when the
  /// configuration has no closed form (e.g. a quadratic whose constrained
  /// minimizer needs an iterative solve).
  PopulationMinimum population_minimum() const;
  /// Mean of the coordinate-0 spike (spike_1d only).
  double spike_mean() const;

 private:
  Family family_;
  FamilyParams params_;
  FeasibleDomain domain_;
  DeclaredConstants constants_;
};

/// f_x(w) = -<w, x>, x ~ N(mean, noise_sd^2 I). Linear population risk is
/// smooth for every positive constant; beta_bar is the value declared to the
/// optimizers.
FunctionDistribution make_linear_loss(Vector mean, double noise_sd, FeasibleDomain domain, double beta_bar = 1.0);
/// Population risk 1/2 (w - w*)' diag(spectrum) (w - w*), gradient noise N(0, noise_sd^2 I).
FunctionDistribution make_quadratic(Vector spectrum, Vector minimizer, double noise_sd, FeasibleDomain domain);
/// f_x(w) = -1/2 x ||w - c||^2 with x ~ N(scale_mean, scale_sd^2); scale_mean < 0.
/// Individual functions have unbounded smoothness, the population risk does not.
FunctionDistribution make_scaled_quadratic(Vector center, double scale_mean, double scale_sd, FeasibleDomain domain);
/// f_x(w) = ||w - x|| with x = center w.p. 1 - spread_prob, otherwise
/// center +/- spread * e_j with j and the sign uniform. Nonsmooth, 1-Lipschitz,
/// noncentral second moment bounded by 1.
FunctionDistribution make_abs_loss(Vector center, double spread, double spread_prob, FeasibleDomain domain);

/// Lower-bound hard instance. Coordinate 0 is the spike variable: D1 takes
/// 0, +sigma/sqrt(eps), -sigma/sqrt(eps) w.p. 1-eps, eps/2, eps/2; D1prime takes
/// 0, +sigma/sqrt(eps) w.p. 1-eps, eps. When embed_dim > 1 the remaining
/// coordinates are independent fair +/-sigma coins. Loss f_x(w) = -<w, x> on
/// the ball of radius half_width (the interval [-D, D] in one dimension).
FunctionDistribution make_spike_instance_1d(double sigma, double eps, double half_width, SpikeVariant variant,
                                            Eigen::Index embed_dim = 1, double beta_bar = 1.0);

/// Product distribution Q_nu on {+/-sigma}^d with coordinate biases
/// delta_j = p nu_j / sqrt(d); loss -<w, x> on the ball of diameter D.
FunctionDistribution make_product_instance(const ProductInstanceParams& params, double diameter,
                                           double beta_bar = 1.0);

/// n i.i.d. draws. Index i uses its own stream derived from (seed, i), so the
/// result is a pure function of (dist, n, seed) and prefixes agree across n.
std::vector<SampleFunction> sample_functions(const FunctionDistribution& dist, std::size_t n, std::uint64_t seed);

double population_risk(const FunctionDistribution& dist, const Vector& w);
Vector population_gradient(const FunctionDistribution& dist, const Vector& w);

}  // namespace rsco
