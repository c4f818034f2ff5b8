#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsco/problems.hpp"

namespace rsco {

enum class AdversaryKind { none, mean_shift, tv_swap, worst_direction, huber_mixture };

std::string_view to_string(AdversaryKind kind) noexcept;
AdversaryKind adversary_kind_from_string(std::string_view name);

/// One of the canonical strong-contamination attacks.
///
///  mean_shift       planted constant-gradient functions at mu + R v, where mu
///                   is the clean gradient mean at the probe point
///  tv_swap          moves a spike instance from one variant to the other by
///                   flipping the sign of spike samples; the target variant is
///                   taken from `target` (default D1prime)
///  worst_direction  like mean_shift but v is the top eigenvector of the clean
///                   gradient covariance at the probe point; R <= 0 selects
///                   sqrt(lambda_max / eps)
///  huber_mixture    a Bernoulli(eps) subset is redrawn from `target`
struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::none;
  double magnitude = 0.0;
  /// Unit direction for mean_shift. Defaults to e_0.
  std::optional<Vector> direction;
  /// Point at which gradients are inspected. Defaults to the origin; the
  /// harness passes the domain center.
  std::optional<Vector> probe;
  std::shared_ptr<const FunctionDistribution> target;
};

/// Output of the adversary. The mask is for diagnostics only; estimators get
/// `stripped()`.
struct ContaminatedSampleSet {
  std::vector<SampleFunction> functions;
  std::vector<bool> corruption_mask;
  double epsilon = 0.0;
  AdversaryKind adversary = AdversaryKind::none;
  std::uint64_t seed = 0;

  const std::vector<SampleFunction>& stripped() const noexcept { return functions; }
  std::size_t num_corrupted() const noexcept;
};

/// Replaces min(floor(eps n), demand) of the clean functions. Throws
/// InvalidArgument unless 0 <= eps < 1/2 and for a malformed spec.
ContaminatedSampleSet corrupt(const std::vector<SampleFunction>& clean, const AdversarySpec& adversary, double eps,
                              std::uint64_t seed);

/// Mean of the clean gradients at w.
Vector mean_gradient(const std::vector<SampleFunction>& functions, const Vector& w);

}  // namespace rsco
