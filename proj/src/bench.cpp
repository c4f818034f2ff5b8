#include "rsco/bench.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rsco/estimators.hpp"
#include "rsco/kernels.hpp"

namespace rsco::bench {

using nlohmann::json;

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::robust_net_pgd: return "robust_net_pgd";
    case Algorithm::robust_pgd: return "robust_pgd";
    case Algorithm::smooth_and_optimize: return "smooth_and_optimize";
    case Algorithm::naive_mean_pgd: return "naive_mean_pgd";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (auto a : {Algorithm::robust_net_pgd, Algorithm::robust_pgd, Algorithm::smooth_and_optimize,
                 Algorithm::naive_mean_pgd})
    if (to_string(a) == name) return a;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

Axis axis_from_string(std::string_view name) {
  if (name == "epsilon") return Axis::epsilon;
  if (name == "n") return Axis::n;
  throw InvalidArgument("unknown axis '" + std::string(name) + "' (expected epsilon or n)");
}

std::vector<Cell> ExperimentSpec::cells() const {
  std::vector<Cell> out;
  for (auto dd : d)
    for (auto nn : n)
      for (auto e : epsilon)
        for (auto s : sigma) out.push_back(Cell{out.size(), dd, nn, e, s});
  return out;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
std::vector<T> read_axis(const json& grid, const char* key, std::vector<T> fallback) {
  if (!grid.contains(key)) return fallback;
  const json& v = grid.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<T>());
  } else {
    out.push_back(v.get<T>());
  }
  if (out.empty()) throw InvalidArgument(std::string("grid axis '") + key + "' is empty");
  return out;
}

DistributionSpec parse_distribution(const json& j) {
  reject_unknown(j,
                 {"family", "diameter", "beta_bar", "mean_norm", "curvature", "minimizer_norm", "scale_mean", "spread",
                  "spread_prob", "variant", "spike_epsilon", "p", "p_scale", "nu"},
                 "distribution");
  DistributionSpec s;
  if (!j.contains("family")) throw InvalidArgument("distribution.family is required");
  s.family = family_from_string(j.at("family").get<std::string>());
  read(j, "diameter", s.diameter);
  read(j, "beta_bar", s.beta_bar);
  read(j, "mean_norm", s.mean_norm);
  read(j, "curvature", s.curvature);
  read(j, "minimizer_norm", s.minimizer_norm);
  read(j, "scale_mean", s.scale_mean);
  read(j, "spread", s.spread);
  read(j, "spread_prob", s.spread_prob);
  if (j.contains("variant")) s.variant = spike_variant_from_string(j.at("variant").get<std::string>());
  read(j, "spike_epsilon", s.spike_epsilon);
  read(j, "p", s.p);
  read(j, "p_scale", s.p_scale);
  read(j, "nu", s.nu);
  return s;
}

AdversaryConfig parse_adversary(const json& j) {
  reject_unknown(j, {"kind", "magnitude", "direction", "target_variant", "target"}, "adversary");
  AdversaryConfig a;
  if (j.contains("kind")) a.kind = adversary_kind_from_string(j.at("kind").get<std::string>());
  read(j, "magnitude", a.magnitude);
  if (j.contains("direction")) {
    const auto v = j.at("direction").get<std::vector<double>>();
    a.direction = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (j.contains("target_variant"))
    a.target_variant = spike_variant_from_string(j.at("target_variant").get<std::string>());
  if (j.contains("target")) a.target = parse_distribution(j.at("target"));
  return a;
}

AlgorithmSpec parse_algorithm(const json& j) {
  reject_unknown(j, {"name", "tau", "iterations", "max_iterations", "estimate_sigma", "smoothing_radius", "c_mean"},
                 "algorithm");
  AlgorithmSpec a;
  if (j.contains("name")) a.kind = algorithm_from_string(j.at("name").get<std::string>());
  read(j, "tau", a.tau);
  read(j, "iterations", a.iterations);
  read(j, "max_iterations", a.max_iterations);
  read(j, "estimate_sigma", a.estimate_sigma);
  read(j, "smoothing_radius", a.smoothing_radius);
  read(j, "c_mean", a.c_mean);
  return a;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    reject_unknown(j, {"name", "distribution", "adversary", "algorithm", "grid", "trials", "seed"}, "config");
    ExperimentSpec s;
    read(j, "name", s.name);
    if (!j.contains("distribution")) throw InvalidArgument("config.distribution is required");
    s.distribution = parse_distribution(j.at("distribution"));
    if (j.contains("adversary")) s.adversary = parse_adversary(j.at("adversary"));
    if (j.contains("algorithm")) s.algorithm = parse_algorithm(j.at("algorithm"));
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      reject_unknown(g, {"d", "n", "epsilon", "sigma"}, "grid");
      s.d = read_axis<Eigen::Index>(g, "d", s.d);
      s.n = read_axis<std::size_t>(g, "n", s.n);
      s.epsilon = read_axis<double>(g, "epsilon", s.epsilon);
      s.sigma = read_axis<double>(g, "sigma", s.sigma);
    }
    read(j, "trials", s.trials);
    read(j, "seed", s.seed);
    if (s.trials == 0) throw InvalidArgument("trials must be at least 1");
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

// ---------------------------------------------------------------------------
// Building and running

FunctionDistribution build_distribution(const DistributionSpec& spec, const Cell& cell) {
  const Eigen::Index d = cell.d;
  if (d < 1) throw InvalidArgument("grid dimension must be at least 1");
  const Vector e0 = Vector::Unit(d, 0);
  switch (spec.family) {
    case Family::linear_loss:
      return make_linear_loss(spec.mean_norm * e0, cell.sigma, FeasibleDomain::ball_with_diameter(d, spec.diameter),
                              spec.beta_bar);
    case Family::quadratic:
      return make_quadratic(Vector::Constant(d, spec.curvature), spec.minimizer_norm * e0, cell.sigma,
                            FeasibleDomain::ball_with_diameter(d, spec.diameter));
    case Family::scaled_quadratic:
      return make_scaled_quadratic(Vector::Zero(d), spec.scale_mean, cell.sigma,
                                   FeasibleDomain::ball_with_diameter(d, spec.diameter));
    case Family::abs_loss:
      return make_abs_loss(Vector::Zero(d), spec.spread, spec.spread_prob,
                           FeasibleDomain::ball_with_diameter(d, spec.diameter));
    case Family::spike_1d:
      return make_spike_instance_1d(cell.sigma, spec.spike_epsilon.value_or(cell.epsilon), spec.diameter, spec.variant,
                                    d, spec.beta_bar);
    case Family::product_hypercube: {
      ProductInstanceParams params;
      params.nu = Eigen::VectorXi::Ones(d);
      if (spec.nu == "alternating") {
        for (Eigen::Index j = 1; j < d; j += 2) params.nu[j] = -1;
      } else if (spec.nu != "ones") {
        throw InvalidArgument("nu must be 'ones' or 'alternating'");
      }
      params.p = spec.p ? *spec.p
                        : spec.p_scale * std::sqrt(static_cast<double>(d) / static_cast<double>(cell.n));
      params.sigma = cell.sigma;
      return make_product_instance(params, spec.diameter, spec.beta_bar);
    }
  }
  throw InvalidArgument("unknown family");
}

namespace {

AdversarySpec build_adversary(const ExperimentSpec& spec, const Cell& cell, const FunctionDistribution& dist) {
  AdversarySpec a;
  a.kind = spec.adversary.kind;
  a.magnitude = spec.adversary.magnitude;
  a.direction = spec.adversary.direction;
  a.probe = dist.domain().center();
  if (a.kind == AdversaryKind::tv_swap) {
    if (dist.family() != Family::spike_1d) throw InvalidArgument("tv_swap needs the spike_1d family");
    const auto& p = std::get<SpikeParams>(dist.params());
    a.target = std::make_shared<const FunctionDistribution>(
        make_spike_instance_1d(p.sigma, p.epsilon, p.half_width, spec.adversary.target_variant, cell.d));
  }
  if (a.kind == AdversaryKind::huber_mixture) {
    DistributionSpec target = spec.adversary.target.value_or(spec.distribution);
    if (!spec.adversary.target) target.mean_norm = -target.mean_norm;
    a.target = std::make_shared<const FunctionDistribution>(build_distribution(target, cell));
  }
  return a;
}

void check_pairing(Algorithm algorithm, const DeclaredConstants& k, double eps) {
  switch (algorithm) {
    case Algorithm::robust_net_pgd:
      if (!k.beta_bar) throw InvalidArgument("robust_net_pgd needs a family with a declared beta_bar");
      break;
    case Algorithm::robust_pgd:
    case Algorithm::naive_mean_pgd:
      if (!k.beta_bar && !k.lipschitz_bar)
        throw InvalidArgument(std::string(to_string(algorithm)) + " needs a declared beta_bar or lipschitz_bar");
      break;
    case Algorithm::smooth_and_optimize:
      if (!k.lipschitz_bar || !(*k.lipschitz_bar > 0.0))
        throw InvalidArgument("smooth_and_optimize needs a positive declared lipschitz_bar");
      break;
  }
  if (algorithm != Algorithm::naive_mean_pgd) {
    FilterConfig probe;
    probe.epsilon = eps;
    probe.epsilon_prime(1);
  }
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (spec.trials == 0) throw InvalidArgument("trials must be at least 1");
  for (const Cell& cell : spec.cells()) {
    if (cell.n < 2) throw InvalidArgument("every cell needs n >= 2");
    if (!(cell.epsilon >= 0.0 && cell.epsilon < 0.5)) throw InvalidArgument("every cell needs 0 <= epsilon < 1/2");
    const FunctionDistribution dist = build_distribution(spec.distribution, cell);
    dist.population_minimum();
    check_pairing(spec.algorithm.kind, dist.constants(), cell.epsilon);
    build_adversary(spec, cell, dist);
    if (spec.adversary.direction && spec.adversary.direction->size() != cell.d)
      throw InvalidArgument("adversary direction has the wrong dimension");
  }
}

TrialRecord run_trial(const ExperimentSpec& spec, const Cell& cell, std::size_t trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord r;
  r.cell = cell.index;
  r.trial = trial;
  r.family = std::string(to_string(spec.distribution.family));
  r.adversary = std::string(to_string(spec.adversary.kind));
  r.algorithm = std::string(to_string(spec.algorithm.kind));
  r.d = cell.d;
  r.n = cell.n;
  r.epsilon = cell.epsilon;
  r.sigma = cell.sigma;
  r.seed = derive_seed(spec.seed, cell.index, trial);

  const FunctionDistribution dist = build_distribution(spec.distribution, cell);
  const auto clean = sample_functions(dist, cell.n, derive_seed(r.seed, 1));
  const ContaminatedSampleSet data = corrupt(clean, build_adversary(spec, cell, dist), cell.epsilon, derive_seed(r.seed, 2));
  r.corrupted = data.num_corrupted();
  const auto& functions = data.stripped();

  RobustConstants constants = RobustConstants::from(dist.constants());
  RobustOptions options;
  options.epsilon = cell.epsilon;
  options.tau = spec.algorithm.tau;
  options.iterations = spec.algorithm.iterations;
  options.max_iterations = spec.algorithm.max_iterations;
  options.c_mean = spec.algorithm.c_mean;
  options.filter.seed = derive_seed(r.seed, 3);

  if (spec.algorithm.estimate_sigma) {
    PointMatrix grads;
    kernels::parallel::evaluate_gradients(functions, dist.domain().center(), grads);
    constants.sigma = estimate_sigma_lower_bound(grads, cell.epsilon, spec.algorithm.tau, options.filter).sigma_hat;
  }
  r.sigma_used = constants.sigma;

  RobustResult result;
  switch (spec.algorithm.kind) {
    case Algorithm::robust_net_pgd: result = robust_net_pgd(functions, dist.domain(), constants, options); break;
    case Algorithm::robust_pgd: result = robust_pgd(functions, dist.domain(), constants, options); break;
    case Algorithm::naive_mean_pgd: result = naive_mean_pgd(functions, dist.domain(), constants, options); break;
    case Algorithm::smooth_and_optimize: {
      SmoothingConfig smoothing;
      smoothing.radius = spec.algorithm.smoothing_radius;
      smoothing.seed = derive_seed(r.seed, 4);
      result = smooth_and_optimize(functions, dist.domain(), constants.sigma, *constants.lipschitz_bar, options,
                                   smoothing)
                   .result;
      break;
    }
  }
  r.iterations = result.iterations;
  r.filter_calls = result.filter_calls;
  r.filter_iterations = result.filter_iterations;
  r.risk = dist.population_risk(result.w_hat);
  r.min_risk = dist.population_minimum().value;
  r.excess_risk = r.risk - r.min_risk;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto cells = spec.cells();
  const auto jobs = static_cast<long long>(cells.size() * spec.trials);
  std::vector<TrialRecord> records(static_cast<std::size_t>(jobs));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
#pragma omp parallel for schedule(dynamic, 1)
  for (long long job = 0; job < jobs; ++job) {
    const auto k = static_cast<std::size_t>(job);
    try {
      records[k] = run_trial(spec, cells[k / spec.trials], k % spec.trials);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kColumns =
    "cell,trial,family,adversary,algorithm,d,n,epsilon,sigma,seed,corrupted,iterations,filter_calls,"
    "filter_iterations,sigma_used,risk,min_risk,excess_risk";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool include_timing) {
  const auto old = out.precision(17);
  out << kColumns << (include_timing ? ",wall_seconds" : "") << '\n';
  for (const auto& r : records) {
    out << r.cell << ',' << r.trial << ',' << r.family << ',' << r.adversary << ',' << r.algorithm << ',' << r.d << ','
        << r.n << ',' << r.epsilon << ',' << r.sigma << ',' << r.seed << ',' << r.corrupted << ',' << r.iterations << ','
        << r.filter_calls << ',' << r.filter_iterations << ',' << r.sigma_used << ',' << r.risk << ',' << r.min_risk
        << ',' << r.excess_risk;
    if (include_timing) out << ',' << r.wall_seconds;
    out << '\n';
  }
  out.precision(old);
}

std::vector<TrialRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV");
  const auto header = split(line);
  const auto expected = split(kColumns);
  const bool timing = header.size() == expected.size() + 1;
  if (!std::equal(expected.begin(), expected.end(), header.begin(), header.begin() + static_cast<std::ptrdiff_t>(std::min(header.size(), expected.size()))) ||
      (header.size() != expected.size() && !timing))
    throw InvalidArgument("unexpected CSV header");

  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw InvalidArgument("CSV line " + std::to_string(lineno) + " has the wrong field count");
    try {
      TrialRecord r;
      r.cell = std::stoull(f[0]);
      r.trial = std::stoull(f[1]);
      r.family = f[2];
      r.adversary = f[3];
      r.algorithm = f[4];
      r.d = std::stoll(f[5]);
      r.n = std::stoull(f[6]);
      r.epsilon = std::stod(f[7]);
      r.sigma = std::stod(f[8]);
      r.seed = std::stoull(f[9]);
      r.corrupted = std::stoull(f[10]);
      r.iterations = std::stoull(f[11]);
      r.filter_calls = std::stoull(f[12]);
      r.filter_iterations = std::stoull(f[13]);
      r.sigma_used = std::stod(f[14]);
      r.risk = std::stod(f[15]);
      r.min_risk = std::stod(f[16]);
      r.excess_risk = std::stod(f[17]);
      if (timing) r.wall_seconds = std::stod(f[18]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return out;
}

ScalingFit fit_scaling(const std::vector<TrialRecord>& records, Axis axis) {
  if (records.empty()) throw InvalidArgument("no records to fit");
  const auto& first = records.front();
  std::map<double, std::pair<double, std::size_t>> groups;
  for (const auto& r : records) {
    const bool same = r.family == first.family && r.adversary == first.adversary && r.algorithm == first.algorithm &&
                      r.d == first.d && r.sigma == first.sigma &&
                      (axis == Axis::epsilon ? r.n == first.n : r.epsilon == first.epsilon);
    if (!same) throw InvalidArgument("records vary in a parameter other than the fitted axis");
    const double x = axis == Axis::epsilon ? r.epsilon : static_cast<double>(r.n);
    auto& g = groups[x];
    g.first += r.excess_risk;
    g.second += 1;
  }
  if (groups.size() < 3) throw InvalidArgument("need at least 3 distinct axis values");

  std::vector<double> xs, ys;
  for (const auto& [x, g] : groups) {
    const double mean = g.first / static_cast<double>(g.second);
    if (!(x > 0.0) || !(mean > 0.0)) throw InvalidArgument("axis values and mean excess risks must be positive");
    xs.push_back(std::log(x));
    ys.push_back(std::log(mean));
  }
  const auto k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.points = xs.size();
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace rsco::bench
