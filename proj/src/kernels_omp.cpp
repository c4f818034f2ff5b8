#include <omp.h>

#include <algorithm>
#include <vector>

#include "rsco/kernels.hpp"

namespace rsco::kernels::parallel {

namespace {
Eigen::Index block_count(Eigen::Index n) { return (n + kBlockRows - 1) / kBlockRows; }
Eigen::Index block_end(Eigen::Index b, Eigen::Index n) { return std::min(n, (b + 1) * kBlockRows); }
}  // namespace

int num_threads() { return omp_get_max_threads(); }

void set_num_threads(int threads) { omp_set_num_threads(std::max(1, threads)); }

double total_weight(std::span<const double> h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  const Eigen::Index blocks = block_count(n);
  std::vector<double> partials(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    double partial = 0.0;
    for (Eigen::Index i = b * kBlockRows; i < block_end(b, n); ++i) partial += h[i];
    partials[b] = partial;
  }
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

Vector weighted_sum(const PointMatrix& points, std::span<const double> h, const Vector& center) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  const Eigen::Index blocks = block_count(n);
  Matrix partials = Matrix::Zero(d, blocks);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    double* partial = partials.data() + b * d;
    for (Eigen::Index i = b * kBlockRows; i < block_end(b, n); ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      const double* x = points.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) partial[j] += hi * (x[j] - center[j]);
    }
  }
  Vector total = Vector::Zero(d);
  for (Eigen::Index b = 0; b < blocks; ++b)
    for (Eigen::Index j = 0; j < d; ++j) total[j] += partials(j, b);
  return total;
}

Matrix weighted_scatter(const PointMatrix& points, std::span<const double> h, const Vector& center) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  const Eigen::Index blocks = block_count(n);
  std::vector<Matrix> partials(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    Matrix& partial = partials[b];
    partial.setZero(d, d);
    Vector diff(d);
    for (Eigen::Index i = b * kBlockRows; i < block_end(b, n); ++i) {
      const double hi = h[i];
      if (hi == 0.0) continue;
      const double* x = points.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) diff[j] = x[j] - center[j];
      for (Eigen::Index c = 0; c < d; ++c) {
        const double scaled = hi * diff[c];
        double* col = partial.data() + c * d;
        for (Eigen::Index r = 0; r <= c; ++r) col[r] += scaled * diff[r];
      }
    }
  }
  Matrix total = Matrix::Zero(d, d);
  for (const Matrix& partial : partials)
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r <= c; ++r) total(r, c) += partial(r, c);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = c + 1; r < d; ++r) total(r, c) = total(c, r);
  return total;
}

void projected_scores(const PointMatrix& points, const Vector& center, const Vector& direction,
                      std::span<double> out) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
#pragma omp parallel for schedule(static) if (n > kBlockRows)
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
#pragma omp parallel for schedule(static) if (n > kBlockRows)
  for (Eigen::Index i = 0; i < n; ++i)
    functions[i].gradient_into(w, std::span<double>(out.data() + i * d, static_cast<std::size_t>(d)));
}

}  // namespace rsco::kernels::parallel
