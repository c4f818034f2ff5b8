#include "rsco/problems.hpp"

#include <cmath>
#include <utility>

namespace rsco {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

// min over the domain of -<w, mu>.
PopulationMinimum linear_minimum(const FeasibleDomain& domain, const Vector& mu) {
  PopulationMinimum out;
  if (domain.kind() == FeasibleDomain::Kind::ball) {
    const double norm = mu.norm();
    out.argmin = norm > 0.0 ? Vector(domain.center() + mu * (domain.radius() / norm)) : domain.center();
  } else {
    out.argmin = domain.center();
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
      if (mu[j] > 0.0) out.argmin[j] += domain.half_widths()[j];
      if (mu[j] < 0.0) out.argmin[j] -= domain.half_widths()[j];
    }
  }
  out.value = -out.argmin.dot(mu);
  return out;
}

void require_dim(const Vector& v, const FeasibleDomain& domain, const char* what) {
  if (v.size() != domain.dim()) throw InvalidArgument(std::string(what) + " dimension does not match the domain");
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::linear_loss: return "linear_loss";
    case Family::quadratic: return "quadratic";
    case Family::scaled_quadratic: return "scaled_quadratic";
    case Family::abs_loss: return "abs_loss";
    case Family::spike_1d: return "spike_1d";
    case Family::product_hypercube: return "product_hypercube";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::linear_loss, Family::quadratic, Family::scaled_quadratic, Family::abs_loss,
                   Family::spike_1d, Family::product_hypercube}) {
    if (to_string(f) == name) return f;
  }
  throw InvalidArgument("unknown function family '" + std::string(name) + "'");
}

std::string_view to_string(SpikeVariant variant) noexcept { return variant == SpikeVariant::D1 ? "D1" : "D1prime"; }

SpikeVariant spike_variant_from_string(std::string_view name) {
  if (name == "D1") return SpikeVariant::D1;
  if (name == "D1prime") return SpikeVariant::D1prime;
  throw InvalidArgument("unknown spike variant '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// SampleFunction

SampleFunction SampleFunction::linear(Vector x) {
  SampleFunction f;
  f.form_ = Form::linear;
  f.x_ = std::move(x);
  return f;
}

SampleFunction SampleFunction::quadratic(std::shared_ptr<const QuadraticShape> shape, Vector x) {
  SampleFunction f;
  f.form_ = Form::quadratic;
  f.shape_ = std::move(shape);
  f.x_ = std::move(x);
  return f;
}

SampleFunction SampleFunction::scaled_quadratic(std::shared_ptr<const QuadraticShape> shape, double scale) {
  SampleFunction f;
  f.form_ = Form::scaled_quadratic;
  f.shape_ = std::move(shape);
  f.scale_ = scale;
  return f;
}

SampleFunction SampleFunction::norm(Vector x) {
  SampleFunction f;
  f.form_ = Form::norm;
  f.x_ = std::move(x);
  return f;
}

Eigen::Index SampleFunction::dim() const noexcept {
  return form_ == Form::scaled_quadratic ? shape_->center.size() : x_.size();
}

double SampleFunction::value(const Vector& w) const {
  const Vector z = shift_.size() ? Vector(w + shift_) : w;
  double v = 0.0;
  switch (form_) {
    case Form::linear: v = -z.dot(x_); break;
    case Form::quadratic: {
      const Vector r = z - shape_->center;
      v = 0.5 * r.dot(shape_->spectrum.cwiseProduct(r)) - x_.dot(r);
      break;
    }
    case Form::scaled_quadratic: v = -0.5 * scale_ * (z - shape_->center).squaredNorm(); break;
    case Form::norm: v = (z - x_).norm(); break;
  }
  if (tilt_.size()) v += tilt_.dot(w);
  return v;
}

void SampleFunction::gradient_into(const Vector& w, std::span<double> out) const {
  const Eigen::Index d = dim();
  const bool has_shift = shift_.size() != 0;
  auto z = [&](Eigen::Index j) { return has_shift ? w[j] + shift_[j] : w[j]; };
  switch (form_) {
    case Form::linear:
      for (Eigen::Index j = 0; j < d; ++j) out[j] = -x_[j];
      break;
    case Form::quadratic: {
      const Vector& a = shape_->spectrum;
      const Vector& c = shape_->center;
      for (Eigen::Index j = 0; j < d; ++j) out[j] = a[j] * (z(j) - c[j]) - x_[j];
      break;
    }
    case Form::scaled_quadratic: {
      const Vector& c = shape_->center;
      for (Eigen::Index j = 0; j < d; ++j) out[j] = -scale_ * (z(j) - c[j]);
      break;
    }
    case Form::norm: {
      double sq = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double r = z(j) - x_[j];
        sq += r * r;
      }
      const double len = std::sqrt(sq);
      // Subgradient 0 at the kink.
      for (Eigen::Index j = 0; j < d; ++j) out[j] = len > 0.0 ? (z(j) - x_[j]) / len : 0.0;
      break;
    }
  }
  if (tilt_.size()) {
    for (Eigen::Index j = 0; j < d; ++j) out[j] += tilt_[j];
  }
}

Vector SampleFunction::gradient(const Vector& w) const {
  Vector g(dim());
  gradient_into(w, std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return g;
}

SampleFunction SampleFunction::shifted(const Vector& u) const {
  SampleFunction f = *this;
  f.shift_ = shift_.size() ? Vector(shift_ + u) : u;
  return f;
}

SampleFunction SampleFunction::tilted(const Vector& t) const {
  SampleFunction f = *this;
  f.tilt_ = tilt_.size() ? Vector(tilt_ + t) : t;
  return f;
}

SampleFunction SampleFunction::with_data(Vector x) const {
  SampleFunction f = *this;
  f.x_ = std::move(x);
  return f;
}

bool SampleFunction::operator==(const SampleFunction& other) const {
  if (form_ != other.form_ || scale_ != other.scale_) return false;
  if (!same_vector(x_, other.x_) || !same_vector(shift_, other.shift_) || !same_vector(tilt_, other.tilt_))
    return false;
  if (shape_ == other.shape_) return true;
  return shape_ && other.shape_ && *shape_ == *other.shape_;
}

// ---------------------------------------------------------------------------
// FunctionDistribution

FunctionDistribution::FunctionDistribution(Family family, FamilyParams params, FeasibleDomain domain,
                                           DeclaredConstants constants)
    : family_(family), params_(std::move(params)), domain_(std::move(domain)), constants_(constants) {}

SampleFunction FunctionDistribution::draw(CounterRng& rng) const {
  const Eigen::Index d = dim();
  return std::visit(
      Overloaded{
          [&](const LinearLossParams& p) {
            Vector x = p.mean;
            if (p.noise_sd > 0.0)
              for (Eigen::Index j = 0; j < d; ++j) x[j] += p.noise_sd * rng.normal();
            return SampleFunction::linear(std::move(x));
          },
          [&](const QuadraticParams& p) {
            Vector x = Vector::Zero(d);
            if (p.noise_sd > 0.0)
              for (Eigen::Index j = 0; j < d; ++j) x[j] = p.noise_sd * rng.normal();
            return SampleFunction::quadratic(p.shape, std::move(x));
          },
          [&](const ScaledQuadraticParams& p) {
            const double s = p.scale_mean + (p.scale_sd > 0.0 ? p.scale_sd * rng.normal() : 0.0);
            return SampleFunction::scaled_quadratic(p.shape, s);
          },
          [&](const AbsLossParams& p) {
            Vector x = p.center;
            if (p.spread_prob > 0.0 && rng.bernoulli(p.spread_prob)) {
              const auto pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(2 * d)));
              x[pick / 2] += (pick % 2 == 0) ? p.spread : -p.spread;
            }
            return SampleFunction::norm(std::move(x));
          },
          [&](const SpikeParams& p) {
            Vector x(d);
            const double u = rng.uniform();
            const double spike = p.sigma / std::sqrt(p.epsilon);
            if (p.variant == SpikeVariant::D1) {
              x[0] = u < p.epsilon / 2.0 ? spike : (u < p.epsilon ? -spike : 0.0);
            } else {
              x[0] = u < p.epsilon ? spike : 0.0;
            }
            for (Eigen::Index j = 1; j < d; ++j) x[j] = rng.bernoulli(0.5) ? p.sigma : -p.sigma;
            return SampleFunction::linear(std::move(x));
          },
          [&](const ProductInstanceParams& p) {
            Vector x(d);
            const double scale = p.p / std::sqrt(static_cast<double>(d));
            for (Eigen::Index j = 0; j < d; ++j) {
              const double delta = scale * p.nu[j];
              x[j] = rng.bernoulli((1.0 + delta) / 2.0) ? p.sigma : -p.sigma;
            }
            return SampleFunction::linear(std::move(x));
          },
      },
      params_);
}

double FunctionDistribution::spike_mean() const {
  const auto* p = std::get_if<SpikeParams>(&params_);
  if (!p) throw UnsupportedFamily("spike_mean is only defined for spike_1d");
  return p->variant == SpikeVariant::D1 ? 0.0 : p->sigma * std::sqrt(p->epsilon);
}

Vector FunctionDistribution::population_gradient(const Vector& w) const {
  require_dim(w, domain_, "w");
  const Eigen::Index d = dim();
  return std::visit(
      Overloaded{
          [&](const LinearLossParams& p) -> Vector { return -p.mean; },
          [&](const QuadraticParams& p) -> Vector {
            return p.shape->spectrum.cwiseProduct(w - p.shape->center);
          },
          [&](const ScaledQuadraticParams& p) -> Vector { return -p.scale_mean * (w - p.shape->center); },
          [&](const AbsLossParams& p) -> Vector {
            const Vector r = w - p.center;
            const double len = r.norm();
            Vector g = Vector::Zero(d);
            if (len > 0.0) g += (1.0 - p.spread_prob) * r / len;
            if (p.spread_prob > 0.0 && p.spread > 0.0) {
              const double weight = p.spread_prob / (2.0 * static_cast<double>(d));
              const double base = len * len + p.spread * p.spread;
              for (Eigen::Index j = 0; j < d; ++j) {
                const double plus = std::sqrt(std::max(0.0, base - 2.0 * p.spread * r[j]));   // ||r - s e_j||
                const double minus = std::sqrt(std::max(0.0, base + 2.0 * p.spread * r[j]));  // ||r + s e_j||
                if (plus > 0.0) {
                  g += weight * r / plus;
                  g[j] -= weight * p.spread / plus;
                }
                if (minus > 0.0) {
                  g += weight * r / minus;
                  g[j] += weight * p.spread / minus;
                }
              }
            }
            return g;
          },
          [&](const SpikeParams&) -> Vector {
            Vector g = Vector::Zero(d);
            g[0] = -spike_mean();
            return g;
          },
          [&](const ProductInstanceParams& p) -> Vector {
            const double scale = p.sigma * p.p / std::sqrt(static_cast<double>(d));
            return -scale * p.nu.cast<double>();
          },
      },
      params_);
}

double FunctionDistribution::population_risk(const Vector& w) const {
  require_dim(w, domain_, "w");
  const Eigen::Index d = dim();
  return std::visit(
      Overloaded{
          [&](const LinearLossParams& p) { return -w.dot(p.mean); },
          [&](const QuadraticParams& p) {
            const Vector r = w - p.shape->center;
            return 0.5 * r.dot(p.shape->spectrum.cwiseProduct(r));
          },
          [&](const ScaledQuadraticParams& p) { return -0.5 * p.scale_mean * (w - p.shape->center).squaredNorm(); },
          [&](const AbsLossParams& p) {
            const Vector r = w - p.center;
            const double len = r.norm();
            double v = (1.0 - p.spread_prob) * len;
            if (p.spread_prob > 0.0) {
              const double weight = p.spread_prob / (2.0 * static_cast<double>(d));
              const double base = len * len + p.spread * p.spread;
              for (Eigen::Index j = 0; j < d; ++j) {
                v += weight * std::sqrt(std::max(0.0, base - 2.0 * p.spread * r[j]));
                v += weight * std::sqrt(std::max(0.0, base + 2.0 * p.spread * r[j]));
              }
            }
            return v;
          },
          [&](const SpikeParams&) { return -w[0] * spike_mean(); },
          [&](const ProductInstanceParams& p) {
            const double scale = p.sigma * p.p / std::sqrt(static_cast<double>(d));
            return -scale * w.dot(p.nu.cast<double>());
          },
      },
      params_);
}

PopulationMinimum FunctionDistribution::population_minimum() const {
  return std::visit(
      Overloaded{
          [&](const LinearLossParams& p) { return linear_minimum(domain_, p.mean); },
          [&](const QuadraticParams& p) {
            const Vector& c = p.shape->center;
            PopulationMinimum out;
            if (domain_.contains(c, 0.0)) {
              out.argmin = c;
            } else if (domain_.kind() == FeasibleDomain::Kind::box) {
              out.argmin = domain_.project(c);  // separable: the clamp is exact
            } else if ((p.shape->spectrum.array() == p.shape->spectrum[0]).all()) {
              out.argmin = domain_.project(c);  // isotropic: Euclidean projection is exact
            } else {
              throw UnsupportedFamily("quadratic with anisotropic spectrum and infeasible minimizer on a ball");
            }
            out.value = population_risk(out.argmin);
            return out;
          },
          [&](const ScaledQuadraticParams& p) {
            PopulationMinimum out;
            out.argmin = domain_.project(p.shape->center);
            out.value = population_risk(out.argmin);
            return out;
          },
          [&](const AbsLossParams& p) {
            if (!domain_.contains(p.center, 0.0))
              throw UnsupportedFamily("abs_loss minimum has a closed form only when its center is feasible");
            // Symmetric atoms around the center: the center minimizes the convex risk.
            PopulationMinimum out;
            out.argmin = p.center;
            out.value = p.spread_prob * p.spread;
            return out;
          },
          [&](const SpikeParams&) {
            Vector mu = Vector::Zero(dim());
            mu[0] = spike_mean();
            return linear_minimum(domain_, mu);
          },
          [&](const ProductInstanceParams&) { return linear_minimum(domain_, -population_gradient(domain_.center())); },
      },
      params_);
}

// ---------------------------------------------------------------------------
// Constructors

FunctionDistribution make_linear_loss(Vector mean, double noise_sd, FeasibleDomain domain, double beta_bar) {
  require_dim(mean, domain, "mean");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("noise_sd must be nonnegative");
  if (!(beta_bar > 0.0)) throw InvalidArgument("beta_bar must be positive");
  DeclaredConstants k;
  k.sigma = noise_sd;
  k.beta_bar = beta_bar;
  k.lipschitz_bar = mean.norm();
  k.noncentral_g = std::sqrt(mean.squaredNorm() + noise_sd * noise_sd);
  return FunctionDistribution(Family::linear_loss, LinearLossParams{std::move(mean), noise_sd}, std::move(domain), k);
}

FunctionDistribution make_quadratic(Vector spectrum, Vector minimizer, double noise_sd, FeasibleDomain domain) {
  require_dim(spectrum, domain, "spectrum");
  require_dim(minimizer, domain, "minimizer");
  if (!(spectrum.array() >= 0.0).all() || !(spectrum.maxCoeff() > 0.0))
    throw InvalidArgument("quadratic spectrum must be nonnegative with a positive entry");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("noise_sd must be nonnegative");
  DeclaredConstants k;
  k.sigma = noise_sd;
  k.beta_bar = spectrum.maxCoeff();
  k.lipschitz_bar = spectrum.maxCoeff() * domain.max_distance_from(minimizer);
  k.noncentral_g = std::sqrt(*k.lipschitz_bar * *k.lipschitz_bar + noise_sd * noise_sd);
  auto shape = std::make_shared<const QuadraticShape>(QuadraticShape{std::move(spectrum), std::move(minimizer)});
  return FunctionDistribution(Family::quadratic, QuadraticParams{std::move(shape), noise_sd}, std::move(domain), k);
}

FunctionDistribution make_scaled_quadratic(Vector center, double scale_mean, double scale_sd, FeasibleDomain domain) {
  require_dim(center, domain, "center");
  if (!(scale_mean < 0.0)) throw InvalidArgument("scale_mean must be negative for a convex population risk");
  if (!(scale_sd >= 0.0)) throw InvalidArgument("scale_sd must be nonnegative");
  const double reach = domain.max_distance_from(center);
  DeclaredConstants k;
  k.sigma = scale_sd * reach;
  k.beta_bar = -scale_mean;
  k.lipschitz_bar = -scale_mean * reach;
  k.noncentral_g = std::sqrt(scale_mean * scale_mean + scale_sd * scale_sd) * reach;
  auto shape = std::make_shared<const QuadraticShape>(QuadraticShape{Vector(), std::move(center)});
  return FunctionDistribution(Family::scaled_quadratic, ScaledQuadraticParams{std::move(shape), scale_mean, scale_sd},
                              std::move(domain), k);
}

FunctionDistribution make_abs_loss(Vector center, double spread, double spread_prob, FeasibleDomain domain) {
  require_dim(center, domain, "center");
  if (!(spread >= 0.0)) throw InvalidArgument("spread must be nonnegative");
  if (!(spread_prob >= 0.0 && spread_prob <= 1.0)) throw InvalidArgument("spread_prob must lie in [0, 1]");
  DeclaredConstants k;
  k.sigma = 1.0;  // gradients have norm <= 1
  k.lipschitz_bar = 1.0;
  k.noncentral_g = 1.0;
  return FunctionDistribution(Family::abs_loss, AbsLossParams{std::move(center), spread, spread_prob},
                              std::move(domain), k);
}

FunctionDistribution make_spike_instance_1d(double sigma, double eps, double half_width, SpikeVariant variant,
                                            Eigen::Index embed_dim, double beta_bar) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("spike instance needs 0 < eps < 1");
  if (!(sigma > 0.0)) throw InvalidArgument("spike instance needs sigma > 0");
  if (!(half_width > 0.0)) throw InvalidArgument("spike instance needs D > 0");
  if (embed_dim < 1) throw InvalidArgument("embedding dimension must be at least 1");
  if (!(beta_bar > 0.0)) throw InvalidArgument("beta_bar must be positive");
  DeclaredConstants k;
  k.sigma = sigma;
  k.beta_bar = beta_bar;
  k.lipschitz_bar = variant == SpikeVariant::D1 ? 0.0 : sigma * std::sqrt(eps);
  k.noncentral_g = sigma;
  return FunctionDistribution(Family::spike_1d, SpikeParams{variant, sigma, eps, half_width},
                              FeasibleDomain::ball(Vector::Zero(embed_dim), half_width), k);
}

FunctionDistribution make_product_instance(const ProductInstanceParams& params, double diameter, double beta_bar) {
  const Eigen::Index d = params.nu.size();
  if (d < 1) throw InvalidArgument("product instance needs at least one coordinate");
  if (!((params.nu.array() == 1) || (params.nu.array() == -1)).all())
    throw InvalidArgument("sign vector entries must be +1 or -1");
  if (!(params.sigma > 0.0)) throw InvalidArgument("product instance needs sigma > 0");
  if (!(params.p >= 0.0) || !(params.p / std::sqrt(static_cast<double>(d)) < 1.0))
    throw InvalidArgument("product instance needs 0 <= p/sqrt(d) < 1");
  if (!(diameter > 0.0)) throw InvalidArgument("product instance needs D > 0");
  if (!(beta_bar > 0.0)) throw InvalidArgument("beta_bar must be positive");
  DeclaredConstants k;
  k.sigma = params.sigma;
  k.beta_bar = beta_bar;
  k.lipschitz_bar = params.sigma * params.p;
  k.noncentral_g = params.sigma * std::sqrt(1.0 + params.p * params.p);
  return FunctionDistribution(Family::product_hypercube, params, FeasibleDomain::ball_with_diameter(d, diameter), k);
}

std::vector<SampleFunction> sample_functions(const FunctionDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample_functions needs n >= 1");
  std::vector<SampleFunction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, i));
    out.push_back(dist.draw(rng));
  }
  return out;
}

double population_risk(const FunctionDistribution& dist, const Vector& w) { return dist.population_risk(w); }
Vector population_gradient(const FunctionDistribution& dist, const Vector& w) { return dist.population_gradient(w); }

}  // namespace rsco
