#include "rsco/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsco/kernels.hpp"
#include "rsco/rng.hpp"

namespace rsco {

namespace kp = kernels::parallel;

WeightVector WeightVector::uniform(std::size_t n) {
  WeightVector w;
  w.h.assign(n, 1.0 / static_cast<double>(n));
  w.mass = kp::total_weight(w.h);
  return w;
}

double FilterConfig::epsilon_prime(std::size_t n) const {
  if (!(epsilon >= 0.0)) throw InvalidArgument("filter epsilon must be nonnegative");
  if (epsilon >= breakdown) throw BreakdownExceeded("epsilon is at or above the breakdown constant");
  if (epsilon_prime_override) {
    const double e = *epsilon_prime_override;
    if (!(e > 0.0)) throw InvalidArgument("eps' override must be positive");
    if (e > breakdown) throw BreakdownExceeded("eps' override is above the breakdown constant");
    return e;
  }
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  const double rule = c1 * epsilon + c2 * std::log(1.0 / tau) / static_cast<double>(n);
  return std::min(rule, breakdown);
}

std::string_view to_string(FilterExit reason) noexcept {
  switch (reason) {
    case FilterExit::mass_floor: return "mass_floor";
    case FilterExit::degenerate_covariance: return "degenerate_covariance";
    case FilterExit::zero_tail_score: return "zero_tail_score";
  }
  return "unknown";
}

void FilterReport::write_trace_csv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "iter,mass,top_eig,t,m\n";
  for (const auto& row : trace) out << row.iter << ',' << row.mass << ',' << row.top_eig << ',' << row.t << ',' << row.m << '\n';
  out.precision(old);
}

EigenEstimate top_eigenvector(const Matrix& m, double tol, int max_iter, std::uint64_t seed) {
  const Eigen::Index d = m.rows();
  if (d == 0 || m.cols() != d) throw InvalidArgument("top_eigenvector needs a nonempty square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw InvalidArgument("matrix is not symmetric");

  EigenEstimate out;
  CounterRng rng(seed);
  out.vector = rng.normal_vector(d);
  const double start_norm = out.vector.norm();
  if (start_norm > 0.0) {
    out.vector /= start_norm;
  } else {
    out.vector = Vector::Unit(d, 0);
  }
  const double trace = m.trace();
  out.value = out.vector.dot(m * out.vector);
  if (!(trace > 0.0)) {
    out.converged = true;
    return out;
  }
  Vector y(d);
  for (int it = 1; it <= max_iter; ++it) {
    y.noalias() = m * out.vector;
    const double norm = y.norm();
    out.iterations = it;
    if (norm == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    out.vector = y / norm;
    const double next = out.vector.dot(m * out.vector);
    const bool done = std::abs(next - out.value) <= tol * trace;
    out.value = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

namespace {

struct Moments {
  Vector mu;
  Matrix sigma;
};

Moments weighted_moments(const PointMatrix& points, const WeightVector& w) {
  // Anchoring at a supported point makes identical inputs return that point
  // exactly.
  std::size_t anchor = 0;
  while (w.h[anchor] == 0.0) ++anchor;
  const Vector base = points.row(static_cast<Eigen::Index>(anchor)).transpose();
  Moments out;
  out.mu = base + kp::weighted_sum(points, w.h, base) / w.mass;
  out.sigma = kp::weighted_scatter(points, w.h, out.mu) / w.mass;
  return out;
}

}  // namespace

FilterReport filter_mean(const PointMatrix& points, const FilterConfig& config) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0 || points.cols() == 0) throw InvalidArgument("filter_mean needs a nonempty point set");
  if (n < 2) throw InvalidArgument("filter_mean needs at least two points");

  FilterReport report;
  report.epsilon_prime = config.epsilon_prime(n);
  report.weights = WeightVector::uniform(n);
  WeightVector& w = report.weights;
  const double floor = 1.0 - 2.0 * report.epsilon_prime;

  std::vector<double> scores(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  bool current = false;
  Moments mom;

  while (w.mass >= floor) {
    mom = weighted_moments(points, w);
    current = true;
    const EigenEstimate eig = top_eigenvector(mom.sigma, config.power_tol, config.power_max_iter, config.seed);
    FilterIteration row;
    row.iter = report.iterations;
    row.mass = w.mass;
    row.top_eig = eig.value;

    if (eig.value <= config.degenerate_rel * (1.0 + mom.mu.squaredNorm())) {
      report.trace.push_back(row);
      report.exit = FilterExit::degenerate_covariance;
      break;
    }

    kp::projected_scores(points, mom.mu, eig.vector, scores);
    order.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (w.h[i] != 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });

    double tail = 0.0;
    double t = scores[order.back()];
    for (auto i : order) {
      tail += w.h[i];
      if (tail >= report.epsilon_prime) {
        t = scores[i];
        break;
      }
    }
    const double m = scores[order.front()];
    row.t = t;
    row.m = m;
    if (m <= config.min_tail_score) {
      report.trace.push_back(row);
      report.exit = FilterExit::zero_tail_score;
      break;
    }

    for (auto i : order) {
      if (scores[i] < t) break;
      w.h[i] *= 1.0 - scores[i] / m;
    }
    const double before = w.mass;
    w.mass = kp::total_weight(w.h);
    row.removed = before - w.mass;
    report.trace.push_back(row);
    ++report.iterations;
    current = false;
    report.exit = FilterExit::mass_floor;
  }

  if (!current) mom = weighted_moments(points, w);
  report.estimate = mom.mu;
  report.top_eigenvalue = top_eigenvector(mom.sigma, config.power_tol, config.power_max_iter, config.seed).value;
  return report;
}

FilterReport bucketed_filter_mean(const PointMatrix& points, double eps, double tau, const FilterConfig& config) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw InvalidArgument("bucketed_filter_mean needs a nonempty point set");
  FilterConfig outer = config;
  outer.epsilon = eps;
  outer.tau = tau;
  const double eps_prime = outer.epsilon_prime(n);
  const auto k = static_cast<std::size_t>(std::floor(eps_prime * static_cast<double>(n) + 1e-9));
  if (k < 2) throw InvalidArgument("too few samples for the bucket rule (k < 2)");
  const std::size_t size = n / k;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(derive_seed(config.seed, 0xB0C4E7));
  rng.shuffle(perm);

  PointMatrix z(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t b = 0; b < k; ++b) {
    const Vector base = points.row(static_cast<Eigen::Index>(perm[b * size])).transpose();
    Vector sum = Vector::Zero(points.cols());
    for (std::size_t j = 1; j < size; ++j)
      sum += points.row(static_cast<Eigen::Index>(perm[b * size + j])).transpose() - base;
    z.row(static_cast<Eigen::Index>(b)) = (base + sum / static_cast<double>(size)).transpose();
  }

  FilterConfig inner = config;
  inner.epsilon = 0.0;
  const auto bad = static_cast<double>(contamination_budget(eps, static_cast<long long>(n)));
  inner.epsilon_prime_override = std::min(config.breakdown, (bad + 1.0) / static_cast<double>(k));
  return filter_mean(z, inner);
}

SigmaEstimate estimate_sigma_lower_bound(const PointMatrix& points, double eps, double tau, const FilterConfig& config,
                                         double c) {
  FilterConfig cfg = config;
  cfg.epsilon = eps;
  cfg.tau = tau;
  SigmaEstimate out;
  out.report = filter_mean(points, cfg);
  const auto n = static_cast<double>(points.rows());
  const auto d = static_cast<double>(points.cols());
  out.delta = std::sqrt(eps) + std::sqrt(d / n) + std::sqrt(std::log(1.0 / tau) / n);
  if (eps > 0.0)
    out.sigma_hat = std::sqrt(std::max(0.0, out.report.top_eigenvalue)) / std::sqrt(1.0 + c * out.delta * out.delta / eps);
  return out;
}

namespace {

double spectral_norm_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void check_subset(const std::vector<std::size_t>& subset, std::size_t n) {
  for (auto i : subset)
    if (i >= n) throw InvalidArgument("subset index out of range");
}

}  // namespace

GoodSetDiagnostics check_good_set(const PointMatrix& grads, const std::vector<std::size_t>& subset,
                                  const Vector& pop_grad, double sigma, double eps, double c_mean, double c_cov) {
  const auto n = static_cast<double>(grads.rows());
  if (subset.empty() || static_cast<double>(subset.size()) < (1.0 - eps) * n - 1e-9)
    throw InvalidArgument("subset is smaller than (1 - eps) n");
  if (pop_grad.size() != grads.cols()) throw InvalidArgument("pop_grad has the wrong dimension");
  check_subset(subset, static_cast<std::size_t>(grads.rows()));

  const Eigen::Index d = grads.cols();
  Vector mean = Vector::Zero(d);
  Matrix second = Matrix::Zero(d, d);
  for (auto i : subset) {
    const Vector diff = grads.row(static_cast<Eigen::Index>(i)).transpose() - pop_grad;
    mean += diff;
    second.selfadjointView<Eigen::Lower>().rankUpdate(diff);
  }
  const auto size = static_cast<double>(subset.size());
  mean /= size;
  second = second.selfadjointView<Eigen::Lower>();
  second /= size;

  GoodSetDiagnostics out;
  out.mean_dev = mean.norm();
  out.cov_norm = spectral_norm_symmetric(second);
  out.passes = out.mean_dev <= c_mean * sigma * std::sqrt(eps) && out.cov_norm <= c_cov * sigma * sigma;
  return out;
}

StabilityDiagnostics check_stability(const PointMatrix& points, const std::vector<std::size_t>& subset,
                                     const Vector& mu, double sigma, double eps, double delta, std::size_t samples,
                                     std::uint64_t seed) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InvalidArgument("stability needs 0 <= eps < 1/2");
  if (!(delta >= eps)) throw InvalidArgument("stability needs delta >= eps");
  if (subset.empty()) throw InvalidArgument("stability needs a nonempty subset");
  if (mu.size() != points.cols()) throw InvalidArgument("mu has the wrong dimension");
  check_subset(subset, static_cast<std::size_t>(points.rows()));

  const Eigen::Index d = points.cols();
  const std::size_t size = subset.size();
  const auto keep = static_cast<std::size_t>(std::ceil((1.0 - eps) * static_cast<double>(size) - 1e-9));
  const Matrix target = sigma * sigma * Matrix::Identity(d, d);

  StabilityDiagnostics out;
  out.mean_bound = sigma * delta;
  out.cov_bound = eps > 0.0 ? sigma * sigma * delta * delta / eps : std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<std::size_t>& s) {
    Vector mean = Vector::Zero(d);
    Matrix second = Matrix::Zero(d, d);
    for (auto i : s) {
      const Vector diff = points.row(static_cast<Eigen::Index>(i)).transpose() - mu;
      mean += diff;
      second.selfadjointView<Eigen::Lower>().rankUpdate(diff);
    }
    const auto count = static_cast<double>(s.size());
    second = second.selfadjointView<Eigen::Lower>();
    out.worst_mean_dev = std::max(out.worst_mean_dev, (mean / count).norm());
    out.worst_cov_dev = std::max(out.worst_cov_dev, spectral_norm_symmetric(second / count - target));
    ++out.subsets_checked;
  };

  evaluate(subset);

  auto drop_largest = [&](auto score) {
    std::vector<std::size_t> s = subset;
    std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) { return score(a) < score(b); });
    s.resize(keep);
    evaluate(s);
  };
  auto centered = [&](std::size_t i) { return Vector(points.row(static_cast<Eigen::Index>(i)).transpose() - mu); };
  if (keep < size) {
    drop_largest([&](std::size_t i) { return centered(i).squaredNorm(); });
    Matrix second = Matrix::Zero(d, d);
    for (auto i : subset) second += centered(i) * centered(i).transpose();
    const Vector v = top_eigenvector(second / static_cast<double>(size), 1e-10, 500, seed).vector;
    drop_largest([&](std::size_t i) { return v.dot(centered(i)); });
    drop_largest([&](std::size_t i) { return -v.dot(centered(i)); });
    drop_largest([&](std::size_t i) { return -std::abs(v.dot(centered(i))); });

    CounterRng rng(derive_seed(seed, 0x57AB));
    std::vector<std::size_t> s = subset;
    for (std::size_t k = 0; k < samples; ++k) {
      rng.shuffle(s);
      evaluate(std::vector<std::size_t>(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(keep)));
    }
  }

  out.mean_ok = out.worst_mean_dev <= out.mean_bound;
  out.cov_ok = out.worst_cov_dev <= out.cov_bound;
  return out;
}

CovarianceDiagnostics covariance_diagnostics(const PointMatrix& points) {
  if (points.rows() < 2 || points.cols() == 0) throw InvalidArgument("covariance_diagnostics needs at least two points");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix centered = points.rowwise() - mean;
  CovarianceDiagnostics out;
  out.covariance = centered.transpose() * centered / static_cast<double>(points.rows());
  out.trace = out.covariance.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(out.covariance, Eigen::EigenvaluesOnly);
  out.spectral_norm = std::max(0.0, solver.eigenvalues().maxCoeff());
  out.stable_rank = out.spectral_norm > 0.0 ? out.trace / out.spectral_norm : 0.0;
  return out;
}

}  // namespace rsco
