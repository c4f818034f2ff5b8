#include "rsco/kernels.hpp"

#include <algorithm>

namespace rsco::kernels::serial {

namespace {
Eigen::Index block_count(Eigen::Index n) { return (n + kBlockRows - 1) / kBlockRows; }
}  // namespace

double total_weight(std::span<const double> h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  double total = 0.0;
  for (Eigen::Index b = 0; b < block_count(n); ++b) {
    double partial = 0.0;
    for (Eigen::Index i = b * kBlockRows; i < std::min(n, (b + 1) * kBlockRows); ++i) partial += h[i];
    total += partial;
  }
  return total;
}

Vector weighted_sum(const PointMatrix& points, std::span<const double> h, const Vector& center) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  Vector total = Vector::Zero(d);
  Vector partial(d);
  for (Eigen::Index b = 0; b < block_count(n); ++b) {
    partial.setZero();
    for (Eigen::Index i = b * kBlockRows; i < std::min(n, (b + 1) * kBlockRows); ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      const double* x = points.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) partial[j] += hi * (x[j] - center[j]);
    }
    for (Eigen::Index j = 0; j < d; ++j) total[j] += partial[j];
  }
  return total;
}

Matrix weighted_scatter(const PointMatrix& points, std::span<const double> h, const Vector& center) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  Matrix total = Matrix::Zero(d, d);
  Matrix partial(d, d);
  Vector diff(d);
  for (Eigen::Index b = 0; b < block_count(n); ++b) {
    partial.setZero();
    for (Eigen::Index i = b * kBlockRows; i < std::min(n, (b + 1) * kBlockRows); ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      const double* x = points.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) diff[j] = x[j] - center[j];
      // Upper triangle, column-major storage: column c holds rows 0..c.
      for (Eigen::Index c = 0; c < d; ++c) {
        const double scaled = hi * diff[c];
        double* col = partial.data() + c * d;
        for (Eigen::Index r = 0; r <= c; ++r) col[r] += scaled * diff[r];
      }
    }
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r <= c; ++r) total(r, c) += partial(r, c);
  }
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = c + 1; r < d; ++r) total(r, c) = total(c, r);
  return total;
}

void projected_scores(const PointMatrix& points, const Vector& center, const Vector& direction,
                      std::span<double> out) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* x = points.data() + i * d;
    double dot = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) dot += direction[j] * (x[j] - center[j]);
    out[i] = dot * dot;
  }
}

void evaluate_gradients(std::span<const SampleFunction> functions, const Vector& w, PointMatrix& out) {
  const auto n = static_cast<Eigen::Index>(functions.size());
  const Eigen::Index d = w.size();
  out.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    functions[i].gradient_into(w, std::span<double>(out.data() + i * d, static_cast<std::size_t>(d)));
}

}  // namespace rsco::kernels::serial
