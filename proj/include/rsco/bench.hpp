#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsco/contamination.hpp"
#include "rsco/optimizer.hpp"
#include "rsco/problems.hpp"

namespace rsco::bench {

/// One grid cell. The grid is the cartesian product d x n x epsilon x sigma
/// with sigma varying fastest.
struct Cell {
  std::size_t index = 0;
  Eigen::Index d = 1;
  std::size_t n = 1;
  double epsilon = 0.0;
  double sigma = 1.0;
};

/// Family parameters. The cell's sigma is the noise scale of the family
/// (noise_sd, scale_sd, spike or coin scale); abs_loss ignores it.
struct DistributionSpec {
  Family family = Family::linear_loss;
  /// Ball diameter; for spike_1d the half width D of [-D, D].
  double diameter = 1.0;
  /// Declared smoothness of the linear-type families.
  double beta_bar = 1.0;
  /// linear_loss: mean = mean_norm * e_0.
  double mean_norm = 1.0;
  /// quadratic: spectrum = curvature * 1, minimizer = minimizer_norm * e_0.
  double curvature = 1.0;
  double minimizer_norm = 0.0;
  /// scaled_quadratic, centered at the origin.
  double scale_mean = -1.0;
  /// abs_loss, centered at the origin.
  double spread = 0.0;
  double spread_prob = 0.0;
  /// spike_1d: spike mass defaults to the cell's epsilon.
  SpikeVariant variant = SpikeVariant::D1prime;
  std::optional<double> spike_epsilon;
  /// product_hypercube: p defaults to p_scale * sqrt(d / n); nu is "ones" or
  /// "alternating".
  std::optional<double> p;
  double p_scale = 1.0;
  std::string nu = "ones";
};

struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::none;
  double magnitude = 0.0;
  std::optional<Vector> direction;
  /// tv_swap target variant.
  SpikeVariant target_variant = SpikeVariant::D1prime;
  /// huber_mixture target; defaults to the clean spec with the mean negated.
  std::optional<DistributionSpec> target;
};

enum class Algorithm { robust_net_pgd, robust_pgd, smooth_and_optimize, naive_mean_pgd };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm algorithm_from_string(std::string_view name);

struct AlgorithmSpec {
  Algorithm kind = Algorithm::robust_net_pgd;
  double tau = 0.1;
  std::optional<std::size_t> iterations;
  std::size_t max_iterations = 10000;
  /// Replace the declared sigma by the filter lower bound at the domain center.
  bool estimate_sigma = false;
  std::optional<double> smoothing_radius;
  double c_mean = 4.0;
};

struct ExperimentSpec {
  std::string name = "experiment";
  DistributionSpec distribution;
  AdversaryConfig adversary;
  AlgorithmSpec algorithm;
  std::vector<Eigen::Index> d{1};
  std::vector<std::size_t> n{100};
  std::vector<double> epsilon{0.0};
  std::vector<double> sigma{1.0};
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  std::vector<Cell> cells() const;
};

/// Parses the JSON config format documented in README.md. Throws
/// InvalidArgument on malformed input.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);

struct TrialRecord {
  std::size_t cell = 0;
  std::size_t trial = 0;
  std::string family;
  std::string adversary;
  std::string algorithm;
  Eigen::Index d = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t corrupted = 0;
  std::size_t iterations = 0;
  std::size_t filter_calls = 0;
  std::size_t filter_iterations = 0;
  /// sigma handed to the optimizer (declared or estimated).
  double sigma_used = 0.0;
  double risk = 0.0;
  double min_risk = 0.0;
  double excess_risk = 0.0;
  double wall_seconds = 0.0;
};

FunctionDistribution build_distribution(const DistributionSpec& spec, const Cell& cell);

/// Checks every cell (distribution, closed-form minimum, algorithm pairing,
/// adversary) without running trials.
void validate(const ExperimentSpec& spec);

/// One record per (cell, trial) in that order. Trials run in parallel.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec);
TrialRecord run_trial(const ExperimentSpec& spec, const Cell& cell, std::size_t trial);

/// Fixed column order; wall-clock is appended only when requested so that
/// reruns are byte-identical by default.
void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool include_timing = false);
std::vector<TrialRecord> read_csv(std::istream& in);

enum class Axis { epsilon, n };
Axis axis_from_string(std::string_view name);

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares of log(mean excess) on log(axis). Needs >= 3 distinct
/// positive axis values, positive means, and every other parameter constant.
ScalingFit fit_scaling(const std::vector<TrialRecord>& records, Axis axis);

}  // namespace rsco::bench
