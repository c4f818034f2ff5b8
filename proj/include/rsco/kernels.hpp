#pragma once

#include <span>

#include "rsco/core.hpp"
#include "rsco/problems.hpp"

// Data-parallel inner loops of the filter and the optimizers.
//
// Every reduction runs in one canonical order: rows are cut into fixed blocks
// of kBlockRows, each block is summed row by row, and block partials are added
// in block order. The serial reference walks that order directly; the OpenMP
// versions compute block partials concurrently and combine them serially, so
// both return bitwise-identical results for any thread count.
namespace rsco::kernels {

inline constexpr Eigen::Index kBlockRows = 256;

namespace serial {

/// sum_i h_i
double total_weight(std::span<const double> h);
/// sum_i h_i (x_i - c)
Vector weighted_sum(const PointMatrix& points, std::span<const double> h, const Vector& center);
/// sum_i h_i (x_i - c)(x_i - c)^T
Matrix weighted_scatter(const PointMatrix& points, std::span<const double> h, const Vector& center);
/// out_i = (v . (x_i - c))^2
void projected_scores(const PointMatrix& points, const Vector& center, const Vector& direction,
                      std::span<double> out);
/// Row i of out <- grad f_i(w). out is resized to n x d.
void evaluate_gradients(std::span<const SampleFunction> functions, const Vector& w, PointMatrix& out);

}  // namespace serial

namespace parallel {

double total_weight(std::span<const double> h);
Vector weighted_sum(const PointMatrix& points, std::span<const double> h, const Vector& center);
Matrix weighted_scatter(const PointMatrix& points, std::span<const double> h, const Vector& center);
void projected_scores(const PointMatrix& points, const Vector& center, const Vector& direction,
                      std::span<double> out);
void evaluate_gradients(std::span<const SampleFunction> functions, const Vector& w, PointMatrix& out);

/// Threads used by the parallel kernels (OpenMP max threads).
int num_threads();
void set_num_threads(int threads);

}  // namespace parallel

}  // namespace rsco::kernels
