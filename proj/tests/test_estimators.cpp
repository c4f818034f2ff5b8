#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "rsco/estimators.hpp"
#include "rsco/rng.hpp"

using namespace rsco;

namespace {

PointMatrix gaussian(Eigen::Index n, Eigen::Index d, double sigma, std::uint64_t seed, const Vector& mean) {
  CounterRng rng(seed);
  PointMatrix p(n, d);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) = (mean + sigma * rng.normal_vector(d)).transpose();
  return p;
}

PointMatrix gaussian(Eigen::Index n, Eigen::Index d, double sigma, std::uint64_t seed) {
  return gaussian(n, d, sigma, seed, Vector::Zero(d));
}

FilterConfig config_for(double eps) {
  FilterConfig c;
  c.epsilon = eps;
  return c;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> s(n);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

/// Gaussian bulk plus floor(eps n) points planted at distance r along e_0.
PointMatrix contaminated(Eigen::Index n, Eigen::Index d, double eps, double r, std::uint64_t seed) {
  PointMatrix p = gaussian(n, d, 1.0, seed);
  const auto k = contamination_budget(eps, n);
  for (Eigen::Index i = 0; i < k; ++i) {
    p.row(i).setZero();
    p(i, 0) = r;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// top_eigenvector

TEST(TopEigenvector, Diagonal) {
  const Matrix m = Vector{{3.0, 1.0}}.asDiagonal();
  const auto e = top_eigenvector(m);
  EXPECT_NEAR(e.value, 3.0, 1e-8 * 4);
  EXPECT_NEAR(std::abs(e.vector[0]), 1.0, 1e-6);
  EXPECT_NEAR(e.vector[1], 0.0, 1e-3);
  EXPECT_TRUE(e.converged);
}

TEST(TopEigenvector, Identity) {
  const auto e = top_eigenvector(Matrix::Identity(4, 4));
  EXPECT_NEAR(e.value, 1.0, 1e-12);
  EXPECT_NEAR(e.vector.norm(), 1.0, 1e-12);
}

TEST(TopEigenvector, MatchesJacobiOnRandomPsd) {
  CounterRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i)
      for (Eigen::Index j = 0; j < 8; ++j) b(i, j) = rng.normal();
    const Matrix m = b * b.transpose();
    const double truth = oracle::jacobi_eigenvalues(m).back();
    const auto e = top_eigenvector(m, 1e-8, 200, 7);
    EXPECT_NEAR(e.value, truth, 1e-6 * truth);
  }
}

TEST(TopEigenvector, RejectsAsymmetric) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(top_eigenvector(m), InvalidArgument);
}

TEST(TopEigenvector, ReportsNonConvergence) {
  Matrix m = Vector{{1.0, 1.0 - 1e-9, 0.5}}.asDiagonal();
  m(0, 0) = 1.0;
  const auto e = top_eigenvector(m, 0.0, 3);
  EXPECT_FALSE(e.converged);
  EXPECT_EQ(e.iterations, 3);
}

// ---------------------------------------------------------------------------
// filter_mean

TEST(FilterMean, IdenticalPointsReturnedExactly) {
  const Vector v{{0.1, -3.7, 1e6}};
  PointMatrix p(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) p.row(i) = v.transpose();
  const auto r = filter_mean(p, config_for(0.1));
  EXPECT_EQ(r.estimate, v);
  EXPECT_EQ(r.exit, FilterExit::degenerate_covariance);
}

TEST(FilterMean, OneDimensionalOutliersAgainstTrimmedMean) {
  PointMatrix p = PointMatrix::Zero(100, 1);
  std::vector<double> values(100, 0.0);
  for (Eigen::Index i = 90; i < 100; ++i) p(i, 0) = values[i] = 100.0;
  const auto r = filter_mean(p, config_for(0.1));
  EXPECT_GE(r.estimate[0], 0.0);
  EXPECT_LE(r.estimate[0], 1.0);
  EXPECT_NEAR(r.estimate[0], oracle::trimmed_mean(values, 0.1), 1.0);
}

TEST(FilterMean, CleanGaussianErrorBound) {
  const Eigen::Index d = 5;
  const double eps = 0.05;
  const Vector mean = Vector::LinSpaced(d, -2.0, 2.0);
  const double bound = 5.0 * (std::sqrt(eps) + std::sqrt(static_cast<double>(d) / 1000.0));
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const auto r = filter_mean(gaussian(1000, d, 1.0, 300 + t, mean), config_for(eps));
    if ((r.estimate - mean).norm() <= bound) ++ok;
  }
  EXPECT_GE(ok, 95);
}

TEST(FilterMean, Errors) {
  EXPECT_THROW(filter_mean(PointMatrix(0, 3), config_for(0.1)), InvalidArgument);
  EXPECT_THROW(filter_mean(gaussian(100, 2, 1.0, 1), config_for(0.2)), BreakdownExceeded);
  FilterConfig c = config_for(0.0);
  c.epsilon_prime_override = 0.3;
  EXPECT_THROW(filter_mean(gaussian(100, 2, 1.0, 1), c), BreakdownExceeded);
}

TEST(FilterMean, EpsilonPrimeRule) {
  FilterConfig c = config_for(0.01);
  EXPECT_NEAR(c.epsilon_prime(1000), 0.02 + 2.0 * std::log(10.0) / 1000.0, 1e-15);
  c.epsilon = 0.1;
  EXPECT_DOUBLE_EQ(c.epsilon_prime(1000), 1.0 / 6.0);
}

TEST(FilterMean, MassMonotoneWeightsBoundedTerminates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index n = 400;
    const auto p = contaminated(n, 4, 0.1, 10.0 + seed, seed);
    const auto r = filter_mean(p, config_for(0.1));
    double prev = 1.0 + 1e-15;
    for (const auto& row : r.trace) {
      EXPECT_LE(row.mass, prev);
      EXPECT_GE(row.removed, 0.0);
      prev = row.mass;
    }
    EXPECT_LE(r.iterations, static_cast<std::size_t>(n));
    for (double h : r.weights.h) {
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, 1.0 / n);
    }
    const double sum = std::accumulate(r.weights.h.begin(), r.weights.h.end(), 0.0);
    EXPECT_NEAR(r.weights.mass, sum, 1e-12 * sum);
    if (r.exit == FilterExit::mass_floor) {
      double largest = 0.0;
      for (const auto& row : r.trace) largest = std::max(largest, row.removed);
      EXPECT_GE(r.weights.mass, 1.0 - 2.0 * r.epsilon_prime - largest);
      EXPECT_LT(r.weights.mass, 1.0 - 2.0 * r.epsilon_prime);
    }
  }
}

TEST(FilterMean, TranslationEquivariance) {
  const auto p = contaminated(500, 3, 0.05, 30.0, 4);
  const Vector c{{1e3, -7.5, 0.25}};
  PointMatrix q = p;
  q.rowwise() += c.transpose();
  const auto a = filter_mean(p, config_for(0.05));
  const auto b = filter_mean(q, config_for(0.05));
  EXPECT_LT((b.estimate - (a.estimate + c)).norm(), 1e-9 * (1.0 + c.norm()));
}

TEST(FilterMean, ScaleEquivariance) {
  const auto p = contaminated(500, 3, 0.05, 30.0, 5);
  const auto a = filter_mean(p, config_for(0.05));
  // Powers of two scale every intermediate exactly.
  for (double s : {2.0, 0.25, -4.0}) {
    const auto b = filter_mean(p * s, config_for(0.05));
    EXPECT_EQ(b.estimate, a.estimate * s);
    EXPECT_EQ(b.weights.h, a.weights.h);
  }
  for (double s : {3.0, -0.7}) {
    const auto b = filter_mean(p * s, config_for(0.05));
    EXPECT_LT((b.estimate - a.estimate * s).norm(), 1e-9 * std::abs(s) * (1.0 + a.estimate.norm()));
  }
}

TEST(FilterMean, PermutationEquivariance) {
  const Eigen::Index n = 600;
  const auto p = contaminated(n, 4, 0.1, 20.0, 6);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  CounterRng rng(9);
  rng.shuffle(perm);
  PointMatrix q(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) q.row(i) = p.row(perm[i]);
  const auto a = filter_mean(p, config_for(0.1));
  const auto b = filter_mean(q, config_for(0.1));
  EXPECT_LT((a.estimate - b.estimate).norm(), 1e-9);
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(b.weights.h[i], a.weights.h[perm[i]], 1e-12);
}

TEST(FilterMean, BoundedUnderGrowingOutliers) {
  const double eps = 0.1;
  for (double r : {1e2, 1e4, 1e6}) {
    const auto p = contaminated(2000, 5, eps, r, 7);
    const auto est = filter_mean(p, config_for(eps));
    const Vector naive = p.colwise().mean().transpose();
    EXPECT_LT(est.estimate.norm(), 1.0) << r;
    EXPECT_GT(naive.norm(), 0.9 * eps * r) << r;
  }
}

TEST(FilterMean, TraceCsv) {
  const auto r = filter_mean(contaminated(300, 2, 0.1, 50.0, 8), config_for(0.1));
  std::ostringstream out;
  r.write_trace_csv(out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,mass,top_eig,t,m");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.trace.size() + 1);
}

TEST(FilterMean, ProjectedSecondMomentMatchesSpectralNorm) {
  const Eigen::Index d = 4;
  CounterRng rng(10);
  PointMatrix p = gaussian(5000, d, 1.0, 11);
  p.col(0) *= 3.0;
  p.col(1) *= 1.5;
  const auto diag = covariance_diagnostics(p);
  const Vector mean = p.colwise().mean().transpose();
  double best = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Vector v = rng.normal_vector(d).normalized();
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double t = v.dot(p.row(i).transpose() - mean);
      s += t * t;
    }
    best = std::max(best, s / static_cast<double>(p.rows()));
  }
  EXPECT_LE(best, diag.spectral_norm * (1 + 1e-12));
  EXPECT_GE(best, 0.9 * diag.spectral_norm);
}

// ---------------------------------------------------------------------------
// bucketed_filter_mean

TEST(BucketedFilter, BucketArithmetic) {
  FilterConfig c;
  c.epsilon_prime_override = 0.02;
  const auto r = bucketed_filter_mean(gaussian(1000, 2, 1.0, 12), 0.0, 0.1, c);
  EXPECT_EQ(r.weights.size(), 20u);
}

TEST(BucketedFilter, IdenticalPoints) {
  const Vector v{{0.3, 0.7}};
  PointMatrix p(1000, 2);
  for (Eigen::Index i = 0; i < 1000; ++i) p.row(i) = v.transpose();
  EXPECT_EQ(bucketed_filter_mean(p, 0.05, 0.1, FilterConfig{}).estimate, v);
}

TEST(BucketedFilter, TooFewSamples) {
  EXPECT_THROW(bucketed_filter_mean(gaussian(5, 2, 1.0, 1), 0.0, 0.1, FilterConfig{}), InvalidArgument);
}

TEST(BucketedFilter, ComparableToPlainFilter) {
  const double eps = 0.05;
  double plain = 0.0, bucketed = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto p = gaussian(1000, 5, 1.0, 500 + t);
    FilterConfig c;
    c.seed = 77 + t;
    plain += filter_mean(p, config_for(eps)).estimate.norm();
    bucketed += bucketed_filter_mean(p, eps, 0.1, c).estimate.norm();
  }
  EXPECT_LE(bucketed, 2.0 * plain);
}

// ---------------------------------------------------------------------------
// estimate_sigma_lower_bound

TEST(SigmaLowerBound, IdenticalPointsGiveZero) {
  PointMatrix p = PointMatrix::Constant(100, 3, 2.5);
  EXPECT_EQ(estimate_sigma_lower_bound(p, 0.05, 0.1, FilterConfig{}).sigma_hat, 0.0);
}

TEST(SigmaLowerBound, BelowTrueSigma) {
  int ok = 0;
  for (int t = 0; t < 100; ++t)
    if (estimate_sigma_lower_bound(gaussian(5000, 5, 1.0, 700 + t), 0.05, 0.1, FilterConfig{}).sigma_hat <= 1.0) ++ok;
  EXPECT_GE(ok, 95);
}

TEST(SigmaLowerBound, Homogeneous) {
  const auto p = gaussian(2000, 4, 1.0, 13);
  const double a = estimate_sigma_lower_bound(p, 0.05, 0.1, FilterConfig{}).sigma_hat;
  EXPECT_EQ(estimate_sigma_lower_bound(p * 4.0, 0.05, 0.1, FilterConfig{}).sigma_hat, 4.0 * a);
  EXPECT_NEAR(estimate_sigma_lower_bound(p * 3.0, 0.05, 0.1, FilterConfig{}).sigma_hat, 3.0 * a, 1e-9 * a);
}

// ---------------------------------------------------------------------------
// check_good_set / check_stability

TEST(GoodSet, PointMassPasses) {
  const Vector g{{1.0, -2.0}};
  PointMatrix p(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i) p.row(i) = g.transpose();
  const auto r = check_good_set(p, all_indices(30), g, 1.0, 0.1);
  EXPECT_EQ(r.mean_dev, 0.0);
  EXPECT_EQ(r.cov_norm, 0.0);
  EXPECT_TRUE(r.passes);
}

TEST(GoodSet, CleanGaussianPasses) {
  const Eigen::Index d = 5;
  const double eps = 0.05;
  const auto n = static_cast<Eigen::Index>(20 * d / eps);
  int ok = 0;
  for (int t = 0; t < 100; ++t)
    ok += check_good_set(gaussian(n, d, 1.0, 900 + t), all_indices(n), Vector::Zero(d), 1.0, eps).passes;
  EXPECT_GE(ok, 95);
}

TEST(GoodSet, PlantedOutlierFails) {
  PointMatrix p = gaussian(100, 3, 1.0, 14);
  p.row(0) = Vector{{100.0, 0.0, 0.0}}.transpose();
  const auto r = check_good_set(p, all_indices(100), Vector::Zero(3), 1.0, 0.01);
  EXPECT_GE(r.cov_norm, 100.0);
  EXPECT_FALSE(r.passes);
}

TEST(GoodSet, SubsetTooSmall) {
  EXPECT_THROW(check_good_set(gaussian(100, 2, 1.0, 1), {0, 1, 2}, Vector::Zero(2), 1.0, 0.1), InvalidArgument);
}

TEST(Stability, DegenerateSetClosedForm) {
  const Vector mu{{1.0, 2.0}};
  PointMatrix p(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) p.row(i) = mu.transpose();
  const double sigma = 1.7, eps = 0.1;
  for (double delta : {0.2, std::sqrt(eps), 0.5}) {
    const auto r = check_stability(p, all_indices(40), mu, sigma, eps, delta);
    EXPECT_EQ(r.worst_mean_dev, 0.0);
    EXPECT_TRUE(r.mean_ok);
    EXPECT_NEAR(r.worst_cov_dev, sigma * sigma, 1e-12);
    EXPECT_EQ(r.cov_ok, sigma * sigma <= sigma * sigma * delta * delta / eps) << delta;
  }
}

TEST(Stability, CleanGaussianPasses) {
  const Eigen::Index d = 5, n = 4000;
  const double eps = 0.05;
  const double delta = 4.0 * (std::sqrt(eps) + std::sqrt(d * std::log(static_cast<double>(d)) / n));
  const auto r = check_stability(gaussian(n, d, 1.0, 15), all_indices(n), Vector::Zero(d), 1.0, eps, delta);
  EXPECT_TRUE(r.passes());
  EXPECT_GE(r.subsets_checked, 200u);
}

TEST(Stability, ExtremeOutliersBreakCovariance) {
  const Eigen::Index n = 1000;
  const double eps = 0.05;
  const auto p = contaminated(n, 3, eps, 1e3, 16);
  const double delta = 4.0 * std::sqrt(eps);
  const auto r = check_stability(p, all_indices(n), Vector::Zero(3), 1.0, eps, delta);
  EXPECT_FALSE(r.cov_ok);
}

TEST(Stability, Preconditions) {
  const auto p = gaussian(10, 2, 1.0, 1);
  EXPECT_THROW(check_stability(p, all_indices(10), Vector::Zero(2), 1.0, 0.5, 0.6), InvalidArgument);
  EXPECT_THROW(check_stability(p, all_indices(10), Vector::Zero(2), 1.0, 0.1, 0.05), InvalidArgument);
}

// ---------------------------------------------------------------------------
// covariance_diagnostics

TEST(CovarianceDiagnostics, Isotropic) {
  const Eigen::Index d = 10;
  PointMatrix p = PointMatrix::Zero(2 * d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    p(2 * j, j) = std::sqrt(static_cast<double>(d));
    p(2 * j + 1, j) = -std::sqrt(static_cast<double>(d));
  }
  const auto r = covariance_diagnostics(p);
  EXPECT_NEAR(r.spectral_norm, 1.0, 1e-12);
  EXPECT_NEAR(r.trace, 10.0, 1e-12);
  EXPECT_NEAR(r.stable_rank, 10.0, 1e-10);
}

TEST(CovarianceDiagnostics, RankOne) {
  CounterRng rng(17);
  const Vector dir = Vector{{1.0, 2.0, -2.0}} / 3.0;
  PointMatrix p(200, 3);
  for (Eigen::Index i = 0; i < 200; ++i) p.row(i) = (rng.normal() * dir).transpose();
  EXPECT_NEAR(covariance_diagnostics(p).stable_rank, 1.0, 1e-10);
}

TEST(CovarianceDiagnostics, MatchesDenseOracle) {
  const auto p = gaussian(3000, 6, 2.0, 18);
  const auto r = covariance_diagnostics(p);
  const Matrix c = oracle::covariance(p);
  EXPECT_LT((r.covariance - c).cwiseAbs().maxCoeff(), 1e-8);
  const auto ev = oracle::jacobi_eigenvalues(c);
  EXPECT_NEAR(r.spectral_norm, ev.back(), 1e-8);
  EXPECT_NEAR(r.trace, std::accumulate(ev.begin(), ev.end(), 0.0), 1e-8);
}

TEST(CovarianceDiagnostics, NeedsTwoPoints) {
  EXPECT_THROW(covariance_diagnostics(PointMatrix::Zero(1, 3)), InvalidArgument);
}
