#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rsco {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// One point per row; rows are contiguous so per-point kernels stream memory.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base of every error this library throws. `code()` is the stable,
/// machine-readable tag the CLI prints.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

class UnsupportedFamily : public Error {
 public:
  explicit UnsupportedFamily(const std::string& what) : Error("unsupported-family", what) {}
};

class BreakdownExceeded : public Error {
 public:
  explicit BreakdownExceeded(const std::string& what) : Error("breakdown-exceeded", what) {}
};

/// floor(eps * n) that is not fooled by eps*n landing one ulp below an integer.
inline long long contamination_budget(double eps, long long n) {
  return static_cast<long long>(eps * static_cast<double>(n) + 1e-9);
}

}  // namespace rsco
