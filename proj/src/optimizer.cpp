#include "rsco/optimizer.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "rsco/kernels.hpp"
#include "rsco/rng.hpp"

namespace rsco {

PGDConfig PGDConfig::smooth(double beta, std::size_t iterations, double bias_bound) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("smooth schedule needs 0 < beta < inf");
  if (iterations == 0) throw InvalidArgument("PGD needs T >= 1");
  return PGDConfig{StepSchedule::constant_smooth, iterations, 1.0 / beta, bias_bound};
}

PGDConfig PGDConfig::lipschitz(double lipschitz, double bias_bound, double diameter, std::size_t iterations) {
  if (!(lipschitz >= 0.0) || !(bias_bound >= 0.0)) throw InvalidArgument("Lipschitz schedule needs L, B >= 0");
  if (!(diameter > 0.0)) throw InvalidArgument("Lipschitz schedule needs D > 0");
  if (iterations == 0) throw InvalidArgument("PGD needs T >= 1");
  const double root = std::sqrt(static_cast<double>(iterations));
  const double scale = lipschitz + bias_bound > 0.0 ? lipschitz + bias_bound : 1.0;
  return PGDConfig{StepSchedule::constant_lipschitz, iterations, diameter / (scale * root), bias_bound};
}

double smooth_excess_bound(double beta, double diameter, double bias, std::size_t iterations) {
  return beta * diameter * diameter / (2.0 * static_cast<double>(iterations)) + bias * diameter;
}

double lipschitz_excess_bound(double lipschitz, double diameter, double bias, std::size_t iterations) {
  const double root = std::sqrt(static_cast<double>(iterations));
  return diameter * lipschitz / root + (1.0 + 1.0 / root) * bias * diameter;
}

PGDResult pgd_biased(const GradientOracle& oracle, const FeasibleDomain& domain, const PGDConfig& config,
                     const Vector& w0, bool keep_trace) {
  if (w0.size() != domain.dim() || !domain.contains(w0)) throw InvalidArgument("w0 is not feasible");
  if (!(config.step > 0.0) || config.iterations == 0) throw InvalidArgument("PGD needs eta > 0 and T >= 1");

  PGDResult out;
  Vector w = w0;
  Vector sum = Vector::Zero(w0.size());
  if (keep_trace) out.trace.reserve(config.iterations);
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    const Vector g = oracle(w);
    w = domain.project(w - config.step * g);
    sum += w;
    if (keep_trace) out.trace.push_back(IterateRecord{t, g.norm(), w});
  }
  out.average = sum / static_cast<double>(config.iterations);
  out.last = w;
  return out;
}

void write_iterate_csv(std::ostream& out, const std::vector<IterateRecord>& trace, const FunctionDistribution* dist) {
  std::optional<PopulationMinimum> best;
  if (dist) {
    try {
      best = dist->population_minimum();
    } catch (const UnsupportedFamily&) {
    }
  }
  const auto old = out.precision(17);
  out << "t,grad_norm,risk,dist_to_opt\n";
  for (const auto& row : trace) {
    out << row.t << ',' << row.grad_norm << ',';
    if (dist) out << dist->population_risk(row.w);
    out << ',';
    if (best) out << (row.w - best->argmin).norm();
    out << '\n';
  }
  out.precision(old);
}

double NetConfig::spacing() const {
  if (!(xi > 0.0)) throw InvalidArgument("net fineness must be positive");
  if (dim <= 0) throw InvalidArgument("net dimension must be positive");
  return xi / std::sqrt(static_cast<double>(dim));
}

std::vector<long long> net_coordinates(const NetConfig& net, const Vector& w) {
  const double h = net.spacing();
  if (w.size() != net.dim) throw InvalidArgument("point has the wrong dimension for the net");
  std::vector<long long> k(static_cast<std::size_t>(w.size()));
  for (Eigen::Index j = 0; j < w.size(); ++j) k[j] = std::llround(w[j] / h);
  return k;
}

Vector nearest_net_point(const NetConfig& net, const Vector& w) {
  const double h = net.spacing();
  const auto k = net_coordinates(net, w);
  Vector out(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) out[j] = static_cast<double>(k[j]) * h;
  return out;
}

RobustConstants RobustConstants::from(const DeclaredConstants& declared) {
  return RobustConstants{declared.sigma, declared.beta_bar, declared.lipschitz_bar};
}

namespace {

struct Setup {
  Eigen::Index d = 0;
  std::size_t n = 0;
  double diameter = 0.0;
  double rate = 0.0;  // sqrt(eps) + sqrt(d log(1/tau) / n)
  Vector w0;
  FilterConfig filter;
};

Setup validate(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
               const RobustConstants& constants, const RobustOptions& options) {
  if (functions.empty()) throw InvalidArgument("no sample functions");
  Setup s;
  s.d = domain.dim();
  s.n = functions.size();
  for (const auto& f : functions)
    if (f.dim() != s.d) throw InvalidArgument("sample function dimension does not match the domain");
  if (!(constants.sigma >= 0.0) || !std::isfinite(constants.sigma)) throw InvalidArgument("sigma must be finite and >= 0");
  if (!(options.epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  if (!(options.tau > 0.0 && options.tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  s.diameter = domain.diameter();
  s.rate = std::sqrt(options.epsilon) +
           std::sqrt(static_cast<double>(s.d) * std::log(1.0 / options.tau) / static_cast<double>(s.n));
  s.w0 = options.w0 ? *options.w0 : domain.center();
  if (s.w0.size() != s.d || !domain.contains(s.w0)) throw InvalidArgument("w0 is not feasible");
  s.filter = options.filter;
  s.filter.epsilon = options.epsilon;
  s.filter.tau = options.tau;
  s.filter.epsilon_prime(s.n);  // surfaces breakdown before any work
  return s;
}

std::size_t clamp_iterations(double t, const RobustOptions& options) {
  if (options.iterations) {
    if (*options.iterations == 0) throw InvalidArgument("T must be >= 1");
    return *options.iterations;
  }
  if (!std::isfinite(t) || t > static_cast<double>(options.max_iterations)) return options.max_iterations;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

PGDConfig schedule_for(const Setup& s, const RobustConstants& constants, const RobustOptions& options) {
  if (constants.beta_bar) {
    const double beta = *constants.beta_bar;
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta_bar must be positive and finite");
    const std::size_t t = clamp_iterations(beta * s.diameter / (constants.sigma * s.rate), options);
    return PGDConfig::smooth(beta, t);
  }
  if (constants.lipschitz_bar) {
    const double lip = *constants.lipschitz_bar;
    if (!(lip >= 0.0) || !std::isfinite(lip)) throw InvalidArgument("lipschitz_bar must be finite and >= 0");
    const double bias = options.c_mean * constants.sigma * s.rate;
    const std::size_t t = clamp_iterations((lip / bias) * (lip / bias), options);
    return PGDConfig::lipschitz(lip, bias, s.diameter, t);
  }
  throw InvalidArgument("either beta_bar or lipschitz_bar is required");
}

Vector sample_mean(const PointMatrix& g) {
  const std::vector<double> h(static_cast<std::size_t>(g.rows()), 1.0 / static_cast<double>(g.rows()));
  return kernels::parallel::weighted_sum(g, h, Vector::Zero(g.cols()));
}

RobustResult finish(PGDResult&& run, const PGDConfig& config, RobustResult&& out) {
  out.w_hat = std::move(run.average);
  out.iterations = config.iterations;
  out.step = config.step;
  out.trace = std::move(run.trace);
  return std::move(out);
}

}  // namespace

RobustResult robust_net_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                            const RobustConstants& constants, const RobustOptions& options) {
  const Setup s = validate(functions, domain, constants, options);
  if (!constants.beta_bar) throw InvalidArgument("robust_net_pgd needs beta_bar");
  const PGDConfig config = schedule_for(s, constants, options);
  const double beta = *constants.beta_bar;
  const bool exact = options.epsilon == 0.0 && constants.sigma == 0.0;

  RobustResult out;
  const double xi = options.xi_scale * constants.sigma * std::sqrt(options.epsilon) / beta;
  const bool use_net = xi > 1e-9 * s.diameter;
  const NetConfig net{use_net ? xi : 0.0, s.d};
  out.xi = net.xi;

  PointMatrix grads;
  std::map<std::vector<long long>, Vector> memo;
  auto estimate_at = [&](const Vector& w) -> Vector {
    kernels::parallel::evaluate_gradients(functions, w, grads);
    if (exact) return sample_mean(grads);
    const FilterReport report = filter_mean(grads, s.filter);
    ++out.filter_calls;
    out.filter_iterations += report.iterations;
    return report.estimate;
  };
  auto oracle = [&](const Vector& w) -> Vector {
    if (!use_net) return estimate_at(w);
    auto key = net_coordinates(net, w);
    if (auto it = memo.find(key); it != memo.end()) {
      ++out.memo_hits;
      return it->second;
    }
    Vector g = estimate_at(nearest_net_point(net, w));
    memo.emplace(std::move(key), g);
    return g;
  };
  return finish(pgd_biased(oracle, domain, config, s.w0, options.keep_trace), config, std::move(out));
}

RobustResult robust_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                        const RobustConstants& constants, const RobustOptions& options) {
  const Setup s = validate(functions, domain, constants, options);
  const PGDConfig config = schedule_for(s, constants, options);
  const bool exact = options.epsilon == 0.0 && constants.sigma == 0.0;

  RobustResult out;
  PointMatrix grads;
  auto oracle = [&](const Vector& w) -> Vector {
    kernels::parallel::evaluate_gradients(functions, w, grads);
    if (exact) return sample_mean(grads);
    const FilterReport report = filter_mean(grads, s.filter);
    ++out.filter_calls;
    out.filter_iterations += report.iterations;
    return report.estimate;
  };
  return finish(pgd_biased(oracle, domain, config, s.w0, options.keep_trace), config, std::move(out));
}

RobustResult naive_mean_pgd(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                            const RobustConstants& constants, const RobustOptions& options) {
  RobustOptions relaxed = options;
  relaxed.epsilon = 0.0;  // the baseline has no breakdown constant
  const Setup s = validate(functions, domain, constants, relaxed);
  Setup scheduled = s;
  scheduled.rate = std::sqrt(options.epsilon) +
                   std::sqrt(static_cast<double>(s.d) * std::log(1.0 / options.tau) / static_cast<double>(s.n));
  const PGDConfig config = schedule_for(scheduled, constants, options);

  RobustResult out;
  PointMatrix grads;
  auto oracle = [&](const Vector& w) -> Vector {
    kernels::parallel::evaluate_gradients(functions, w, grads);
    return sample_mean(grads);
  };
  return finish(pgd_biased(oracle, domain, config, s.w0, options.keep_trace), config, std::move(out));
}

double SmoothingConfig::default_radius(double sigma, double lipschitz, double diameter, double eps, double tau,
                                       Eigen::Index d, std::size_t n) {
  if (!(lipschitz > 0.0)) throw InvalidArgument("smoothing needs L > 0");
  return diameter * (sigma / lipschitz + 1.0) *
         (std::sqrt(eps) + std::sqrt(static_cast<double>(d) * std::log(1.0 / tau) / static_cast<double>(n)));
}

SmoothedResult smooth_and_optimize(std::span<const SampleFunction> functions, const FeasibleDomain& domain,
                                   double sigma, double lipschitz, const RobustOptions& options,
                                   const SmoothingConfig& smoothing) {
  if (functions.empty()) throw InvalidArgument("no sample functions");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw InvalidArgument("smoothing needs 0 < L < inf");
  const Eigen::Index d = domain.dim();
  SmoothedResult out;
  out.radius = smoothing.radius ? *smoothing.radius
                                : SmoothingConfig::default_radius(sigma, lipschitz, domain.diameter(), options.epsilon,
                                                                  options.tau, d, functions.size());
  if (!(out.radius > 0.0)) throw InvalidArgument("smoothing radius must be positive");
  out.beta_bar = lipschitz * std::sqrt(static_cast<double>(d)) / out.radius;
  out.sigma = std::sqrt(sigma * sigma + 4.0 * lipschitz * lipschitz);

  std::vector<SampleFunction> smoothed;
  smoothed.reserve(functions.size());
  for (std::size_t i = 0; i < functions.size(); ++i)
    smoothed.push_back(functions[i].shifted(sample_uniform_ball(d, out.radius, derive_seed(smoothing.seed, i))));

  RobustConstants constants{out.sigma, out.beta_bar, lipschitz};
  out.result = robust_net_pgd(smoothed, domain, constants, options);
  return out;
}

Vector sample_uniform_ball(Eigen::Index d, double s, CounterRng& rng) {
  if (d <= 0) throw InvalidArgument("ball dimension must be positive");
  if (!(s > 0.0)) throw InvalidArgument("ball radius must be positive");
  Vector u = rng.normal_vector(d);
  double norm = u.norm();
  while (norm == 0.0) {
    u = rng.normal_vector(d);
    norm = u.norm();
  }
  const double r = s * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return u * (r / norm);
}

Vector sample_uniform_ball(Eigen::Index d, double s, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_uniform_ball(d, s, rng);
}

}  // namespace rsco
