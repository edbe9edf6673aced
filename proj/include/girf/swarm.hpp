#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace girf {

/// Dense row-major block of `rows` vectors of length `cols` (particles x
/// state dimension, particles x parameters ...).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Row i of the result is row ancestors[i] of *this.
  Matrix gather(std::span<const std::size_t> ancestors) const;
  /// Column means of the rows.
  std::vector<double> column_means() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// J particle states at one grid time with guide values and ancestry.
struct ParticleSwarm {
  double time = 0.0;
  Matrix states;                       ///< J x d
  std::vector<double> log_guide;       ///< log u_t at each particle
  std::vector<double> log_weights;     ///< weights before resampling
  std::vector<std::size_t> ancestors;  ///< indices into the previous swarm
};

}  // namespace girf
