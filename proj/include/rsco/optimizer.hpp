#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rsco/domain.hpp"
#include "rsco/estimators.hpp"
#include "rsco/problems.hpp"

namespace rsco {

enum class StepSchedule { constant_smooth, constant_lipschitz };

struct PGDConfig {
  StepSchedule schedule = StepSchedule::constant_smooth;
  std::size_t iterations = 1;
  double step = 1.0;
  double bias_bound = 0.0;

  /// eta = 1 / beta.
  static PGDConfig smooth(double beta, std::size_t iterations, double bias_bound = 0.0);
  /// eta = D / ((L + B) sqrt(T)); eta = D / sqrt(T) when L + B = 0.
  static PGDConfig lipschitz(double lipschitz, double bias_bound, double diameter, std::size_t iterations);
};

/// beta D^2 / (2T) + B D.
double smooth_excess_bound(double beta, double diameter, double bias, std::size_t iterations);
/// D L / sqrt(T) + (1 + 1/sqrt(T)) B D.
double lipschitz_excess_bound(double lipschitz, double diameter, double bias, std::size_t iterations);

struct IterateRecord {
  std::size_t t = 0;
  double grad_norm = 0.0;
  Vector w;  // post-projection iterate w_t
};

struct PGDResult {
  /// (1/T) sum_{t=1..T} w_t.
  Vector average;
  Vector last;
  std::vector<IterateRecord> trace;
};

using GradientOracle = std::function<Vector(const Vector&)>;

/// w_t = Proj(w_{t-1} - eta g(w_{t-1})). Throws InvalidArgument for an
/// infeasible w0.
PGDResult pgd_biased(const GradientOracle& oracle, const FeasibleDomain& domain, const PGDConfig& config,
                     const Vector& w0, bool keep_trace = false);

/// Writes t,grad_norm,risk,dist_to_opt. risk and dist_to_opt are blank when
/// dist is null or has no closed-form minimum.
void write_iterate_csv(std::ostream& out, const std::vector<IterateRecord>& trace,
                       const FunctionDistribution* dist = nullptr);

/// Implicit grid net with per-coordinate spacing xi / sqrt(d), anchored at the
/// origin.
struct NetConfig {
  double xi = 0.0;
  Eigen::Index dim = 0;

  double spacing() const;
};

/// Integer grid coordinates of the nearest net point.
std::vector<long long> net_coordinates(const NetConfig& net, const Vector& w);
/// Divide by the spacing, round, multiply back. O(d).
Vector nearest_net_point(const NetConfig& net, const Vector& w);

/// What the robust optimizers know about p*.
struct RobustConstants {
  double sigma = 0.0;
  std::optional<double> beta_bar;
  std::optional<double> lipschitz_bar;

  static RobustConstants from(const DeclaredConstants& declared);
};

struct RobustOptions {
  double epsilon = 0.0;
  double tau = 0.1;
  /// Default: ceil(beta D / (sigma sqrt(eps) + sigma sqrt(d log(1/tau)/n)))
  /// for the smooth schedule, ceil((L / B)^2) for the Lipschitz one, clamped
  /// to [1, max_iterations].
  std::optional<std::size_t> iterations;
  std::size_t max_iterations = 10000;
  /// Default: the domain center.
  std::optional<Vector> w0;
  /// Base filter settings; epsilon and tau are overwritten from above.
  FilterConfig filter;
  /// Constant in the bias bound B = c_mean sigma (sqrt(eps) + sqrt(d log(1/tau)/n)).
  double c_mean = 4.0;
  /// Multiplies the net fineness; 1 gives xi = sigma sqrt(eps) / beta.
  double xi_scale = 1.0;
  bool keep_trace = false;
};

struct RobustResult {
  Vector w_hat;
  std::size_t iterations = 0;
  double step = 0.0;
  /// Net fineness actually used; 0 when the net was skipped.
  double xi = 0.0;
  /// Filter runs and memo hits (net variant only).
  std::size_t filter_calls = 0;
  std::size_t memo_hits = 0;
  std::size_t filter_iterations = 0;
  std::vector<IterateRecord> trace;
};

/// Net-based PGD with the filter as gradient estimator. Needs beta_bar.
RobustResult robust_net_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                            const RobustConstants& constants, const RobustOptions& options);

/// PGD with the filter applied to gradients at the iterate itself. Uses the
/// smooth schedule when beta_bar is known, else the Lipschitz one.
RobustResult robust_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                        const RobustConstants& constants, const RobustOptions& options);

/// Baseline: sample-mean gradients in the same loop as robust_pgd.
RobustResult naive_mean_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                            const RobustConstants& constants, const RobustOptions& options);

struct SmoothingConfig {
  /// Default: D (sigma / L + 1)(sqrt(eps) + sqrt(d log(1/tau) / n)).
  std::optional<double> radius;
  std::uint64_t seed = 0x510f7ULL;

  static double default_radius(double sigma, double lipschitz, double diameter, double eps, double tau,
                               Eigen::Index d, std::size_t n);
};

struct SmoothedResult {
  RobustResult result;
  double radius = 0.0;
  double beta_bar = 0.0;
  double sigma = 0.0;
};

/// Replaces f_i by f_i(. + u_i) with u_i uniform on the radius-s ball and runs
/// robust_net_pgd with beta = L sqrt(d) / s and sigma = sqrt(sigma^2 + 4L^2).
/// Under a noncentral second-moment bound G pass sigma = L = G.
SmoothedResult smooth_and_optimize(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                                   double sigma, double lipschitz, const RobustOptions& options,
                                   const SmoothingConfig& smoothing = {});

/// Uniform on the d-ball of radius s: normalized Gaussian direction, radius s U^(1/d).
Vector sample_uniform_ball(Eigen::Index d, double s, std::uint64_t seed);
Vector sample_uniform_ball(Eigen::Index d, double s, CounterRng& rng);

}  // namespace rsco
