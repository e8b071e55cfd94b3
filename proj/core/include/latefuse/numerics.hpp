// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latefuse/errors.hpp"

namespace latefuse {

using DenseVector = std::vector<double>;

/// Row-major dense matrix of doubles. Storage size is always rows() * cols().
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return entries_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return entries_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {entries_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {entries_.data() + r * cols_, cols_};
  }

  const DenseVector& entries() const noexcept { return entries_; }
  DenseVector& entries() noexcept { return entries_; }

  bool all_finite() const noexcept;

  bool operator==(const DenseMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  DenseVector entries_;
};

/// Per-channel first and second moments. stds are population standard
/// deviations, clamped to 1 where the channel variance vanishes, so they are
/// always strictly positive and safe to divide by.
struct NormStats {
  DenseVector means;
  DenseVector stds;

  bool operator==(const NormStats&) const = default;
};

/// Solves A x = b by Gaussian elimination with partial pivoting. No explicit
/// inverse is formed. Deterministic: identical inputs give bit-identical
/// results.
///
/// Throws SingularMatrixError when a pivot magnitude falls below
/// 1e-12 * max|A| during elimination.
DenseVector solve_linear(const DenseMatrix& a, const DenseVector& b);

/// Arithmetic mean and population (divide-by-N) standard deviation of every
/// column. Standard deviations below 1e-12 are clamped to 1.
/// Throws EmptyInputError when there are fewer than 2 rows.
NormStats mean_std_per_channel(const DenseMatrix& data);

DenseVector matvec(const DenseMatrix& a, const DenseVector& x);

double dot(std::span<const double> a, std::span<const double> b);

double max_abs(const DenseMatrix& a) noexcept;

}  // namespace latefuse
