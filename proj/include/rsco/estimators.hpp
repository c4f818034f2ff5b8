#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "rsco/core.hpp"

namespace rsco {

/// Per-sample filter weights h with the cached total mass.
struct WeightVector {
  std::vector<double> h;
  double mass = 0.0;

  static WeightVector uniform(std::size_t n);
  std::size_t size() const noexcept { return h.size(); }
};

struct FilterConfig {
  double epsilon = 0.0;
  double tau = 0.1;
  /// eps' = c1 * eps + c2 * log(1/tau) / n, clamped to breakdown.
  double c1 = 2.0;
  double c2 = 2.0;
  double breakdown = 1.0 / 6.0;
  /// Used verbatim instead of the rule when set.
  std::optional<double> epsilon_prime_override;

  double power_tol = 1e-8;
  int power_max_iter = 200;
  /// Exit when ||Sigma(h)|| <= degenerate_rel * (1 + ||mu(h)||^2) ...
  double degenerate_rel = 1e-12;
  /// ... or when the largest tail score is at most this.
  double min_tail_score = 1e-15;
  /// Seeds the power-iteration start vector. Never derived from the data.
  std::uint64_t seed = 0x6a09e667f3bcc909ULL;

  /// Throws BreakdownExceeded when epsilon >= breakdown.
  double epsilon_prime(std::size_t n) const;
};

enum class FilterExit { mass_floor, degenerate_covariance, zero_tail_score };

std::string_view to_string(FilterExit reason) noexcept;

struct FilterIteration {
  std::size_t iter = 0;
  double mass = 0.0;     // ||h||_1 entering the iteration
  double top_eig = 0.0;  // ||Sigma(h)||
  double t = 0.0;        // tail threshold (0 when the iteration exited before scoring)
  double m = 0.0;        // largest tail score
  double removed = 0.0;  // mass removed by the update
};

struct FilterReport {
  Vector estimate;
  WeightVector weights;
  std::size_t iterations = 0;
  /// ||Sigma(h)|| at the returned weights.
  double top_eigenvalue = 0.0;
  double epsilon_prime = 0.0;
  FilterExit exit = FilterExit::mass_floor;
  std::vector<FilterIteration> trace;

  /// CSV with header iter,mass,top_eig,t,m.
  void write_trace_csv(std::ostream& out) const;
};

struct EigenEstimate {
  Vector vector;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration from a seeded random start. Stops when the Rayleigh
/// quotient changes by at most tol * trace(M).
EigenEstimate top_eigenvector(const Matrix& m, double tol = 1e-8, int max_iter = 200,
                              std::uint64_t seed = 0x6a09e667f3bcc909ULL);

/// Iterative filtering. One point per row.
FilterReport filter_mean(const PointMatrix& points, const FilterConfig& config);

/// Random equal-size buckets (k = floor(eps' n), ragged remainder dropped),
/// then filter_mean over the bucket means. The inner filter runs at
/// eps' = min(breakdown, (floor(eps n) + 1) / k).
FilterReport bucketed_filter_mean(const PointMatrix& points, double eps, double tau, const FilterConfig& config);

struct SigmaEstimate {
  double sigma_hat = 0.0;
  double delta = 0.0;
  FilterReport report;
};

/// sqrt(||Sigma(h)||) / sqrt(1 + c delta^2 / eps) with
/// delta = sqrt(eps) + sqrt(d/n) + sqrt(log(1/tau)/n). Zero when eps = 0.
SigmaEstimate estimate_sigma_lower_bound(const PointMatrix& points, double eps, double tau, const FilterConfig& config,
                                         double c = 1.0);

struct GoodSetDiagnostics {
  double mean_dev = 0.0;
  double cov_norm = 0.0;
  bool passes = false;
};

GoodSetDiagnostics check_good_set(const PointMatrix& grads, const std::vector<std::size_t>& subset,
                                  const Vector& pop_grad, double sigma, double eps, double c_mean = 4.0,
                                  double c_cov = 4.0);

struct StabilityDiagnostics {
  double worst_mean_dev = 0.0;  // max ||mu_S' - mu||
  double worst_cov_dev = 0.0;   // max ||Sigma_S' - sigma^2 I||
  double mean_bound = 0.0;      // sigma delta
  double cov_bound = 0.0;       // sigma^2 delta^2 / eps
  std::size_t subsets_checked = 0;
  bool mean_ok = false;
  bool cov_ok = false;
  bool passes() const noexcept { return mean_ok && cov_ok; }
};

/// Sampled (eps, delta)-stability check: random sub-subsets of size
/// ceil((1 - eps)|S|) plus greedy ones that drop the points farthest from mu,
/// overall and along the top covariance direction. Not a certificate.
StabilityDiagnostics check_stability(const PointMatrix& points, const std::vector<std::size_t>& subset,
                                     const Vector& mu, double sigma, double eps, double delta,
                                     std::size_t samples = 200, std::uint64_t seed = 1);

struct CovarianceDiagnostics {
  double spectral_norm = 0.0;
  double trace = 0.0;
  /// trace / spectral_norm; 0 for a zero covariance.
  double stable_rank = 0.0;
  Matrix covariance;
};

/// Covariance normalized by n.
CovarianceDiagnostics covariance_diagnostics(const PointMatrix& points);

}  // namespace rsco
