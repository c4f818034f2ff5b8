#include "rsco/contamination.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsco/kernels.hpp"

namespace rsco {

std::string_view to_string(AdversaryKind kind) noexcept {
  switch (kind) {
    case AdversaryKind::none: return "none";
    case AdversaryKind::mean_shift: return "mean_shift";
    case AdversaryKind::tv_swap: return "tv_swap";
    case AdversaryKind::worst_direction: return "worst_direction";
    case AdversaryKind::huber_mixture: return "huber_mixture";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(std::string_view name) {
  for (auto kind : {AdversaryKind::none, AdversaryKind::mean_shift, AdversaryKind::tv_swap,
                    AdversaryKind::worst_direction, AdversaryKind::huber_mixture}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown adversary '" + std::string(name) + "'");
}

std::size_t ContaminatedSampleSet::num_corrupted() const noexcept {
  return static_cast<std::size_t>(std::count(corruption_mask.begin(), corruption_mask.end(), true));
}

namespace {

PointMatrix gradients_at(const std::vector<SampleFunction>& functions, const Vector& w) {
  PointMatrix g;
  kernels::parallel::evaluate_gradients(functions, w, g);
  return g;
}

Vector column_mean(const PointMatrix& g) {
  const std::vector<double> h(static_cast<std::size_t>(g.rows()), 1.0 / static_cast<double>(g.rows()));
  return kernels::parallel::weighted_sum(g, h, Vector::Zero(g.cols()));
}

/// First k entries of a seeded permutation of the candidates.
std::vector<std::size_t> choose(std::vector<std::size_t> candidates, std::size_t k, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, 0xC0FFEE));
  rng.shuffle(candidates);
  candidates.resize(std::min(k, candidates.size()));
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

Vector probe_point(const AdversarySpec& adversary, Eigen::Index d) {
  if (!adversary.probe) return Vector::Zero(d);
  if (adversary.probe->size() != d) throw InvalidArgument("adversary probe has the wrong dimension");
  return *adversary.probe;
}

}  // namespace

Vector mean_gradient(const std::vector<SampleFunction>& functions, const Vector& w) {
  if (functions.empty()) throw InvalidArgument("mean_gradient needs at least one function");
  return column_mean(gradients_at(functions, w));
}

ContaminatedSampleSet corrupt(const std::vector<SampleFunction>& clean, const AdversarySpec& adversary, double eps,
                              std::uint64_t seed) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InvalidArgument("contamination level must satisfy 0 <= eps < 1/2");

  ContaminatedSampleSet out;
  out.functions = clean;
  out.corruption_mask.assign(clean.size(), false);
  out.epsilon = eps;
  out.adversary = adversary.kind;
  out.seed = seed;

  const auto n = clean.size();
  const auto budget = static_cast<std::size_t>(contamination_budget(eps, static_cast<long long>(n)));
  if (budget == 0 || adversary.kind == AdversaryKind::none) return out;
  const Eigen::Index d = clean.front().dim();

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});

  auto plant = [&](const std::vector<std::size_t>& indices, const Vector& g) {
    const SampleFunction planted = SampleFunction::constant_gradient(g);
    for (auto i : indices) {
      out.functions[i] = planted;
      out.corruption_mask[i] = true;
    }
  };

  switch (adversary.kind) {
    case AdversaryKind::none: break;

    case AdversaryKind::mean_shift: {
      Vector v = Vector::Zero(d);
      if (adversary.direction) {
        if (adversary.direction->size() != d) throw InvalidArgument("mean_shift direction has the wrong dimension");
        const double norm = adversary.direction->norm();
        if (!(norm > 0.0)) throw InvalidArgument("mean_shift direction must be nonzero");
        v = *adversary.direction / norm;
      } else {
        v[0] = 1.0;
      }
      const Vector mu = mean_gradient(clean, probe_point(adversary, d));
      plant(choose(all, budget, seed), mu + adversary.magnitude * v);
      break;
    }

    case AdversaryKind::worst_direction: {
      const PointMatrix g = gradients_at(clean, probe_point(adversary, d));
      const Vector mu = column_mean(g);
      const std::vector<double> h(n, 1.0 / static_cast<double>(n));
      const Matrix cov = kernels::parallel::weighted_scatter(g, h, mu);
      Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
      const Vector v = solver.eigenvectors().col(d - 1);
      const double lambda = std::max(0.0, solver.eigenvalues()[d - 1]);
      const double r = adversary.magnitude > 0.0 ? adversary.magnitude : std::sqrt(lambda / eps);
      plant(choose(all, budget, seed), mu + r * v);
      break;
    }

    case AdversaryKind::tv_swap: {
      SpikeVariant target = SpikeVariant::D1prime;
      if (adversary.target) {
        const auto* p = std::get_if<SpikeParams>(&adversary.target->params());
        if (!p) throw InvalidArgument("tv_swap target must be a spike_1d distribution");
        target = p->variant;
      }
      std::vector<std::size_t> positive, negative;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& f = clean[i];
        if (f.form() != SampleFunction::Form::linear) throw InvalidArgument("tv_swap needs linear spike samples");
        if (f.data()[0] > 0.0) positive.push_back(i);
        if (f.data()[0] < 0.0) negative.push_back(i);
      }
      // D1 -> D1prime: every negative spike becomes positive.
      // D1prime -> D1: half of the positive spikes become negative.
      const std::vector<std::size_t> flips = target == SpikeVariant::D1prime
                                                 ? choose(negative, budget, seed)
                                                 : choose(positive, std::min(budget, positive.size() / 2), seed);
      for (auto i : flips) {
        Vector x = clean[i].data();
        x[0] = -x[0];
        out.functions[i] = clean[i].with_data(std::move(x));
        out.corruption_mask[i] = true;
      }
      break;
    }

    case AdversaryKind::huber_mixture: {
      if (!adversary.target) throw InvalidArgument("huber_mixture needs a target distribution");
      if (adversary.target->dim() != d) throw InvalidArgument("huber_mixture target has the wrong dimension");
      CounterRng select(derive_seed(seed, 0xB0B));
      std::size_t used = 0;
      for (std::size_t i = 0; i < n && used < budget; ++i) {
        if (!select.bernoulli(eps)) continue;
        CounterRng draw(derive_seed(seed, 0xD1A, i));
        out.functions[i] = adversary.target->draw(draw);
        out.corruption_mask[i] = true;
        ++used;
      }
      break;
    }
  }
  return out;
}

}  // namespace rsco
