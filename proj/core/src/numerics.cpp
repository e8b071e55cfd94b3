// SPDX-License-Identifier: Apache-2.0
#include "latefuse/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace latefuse {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : entries_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs(const DenseMatrix& a) noexcept {
  double m = 0.0;
  for (double v : a.entries()) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  DenseVector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

DenseVector solve_linear(const DenseMatrix& a, const DenseVector& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve_linear: matrix must be square");
  if (b.size() != n) throw std::invalid_argument("solve_linear: rhs size mismatch");
  if (!a.all_finite()) throw std::invalid_argument("solve_linear: non-finite matrix entry");
  if (n == 0) return {};

  const double pivot_floor = 1e-12 * max_abs(a);
  if (pivot_floor == 0.0) throw SingularMatrixError("solve_linear: zero matrix");

  // Work on an augmented copy [A | b].
  DenseMatrix ab(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ab(i, j) = a(i, j);
    ab(i, n) = b[i];
  }

  for (std::size_t k = 0; k < n; ++k) {
    // Partial pivoting: first row with the largest |entry| in column k.
    std::size_t pivot_row = k;
    double pivot_mag = std::abs(ab(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double mag = std::abs(ab(i, k));
      if (mag > pivot_mag) {
        pivot_mag = mag;
        pivot_row = i;
      }
    }
    if (!(pivot_mag >= pivot_floor)) {
      throw SingularMatrixError("solve_linear: pivot below 1e-12 * max|A| at column " +
                                std::to_string(k));
    }
    if (pivot_row != k) {
      for (std::size_t j = k; j <= n; ++j) std::swap(ab(k, j), ab(pivot_row, j));
    }
    const double pivot = ab(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = ab(i, k) / pivot;
      if (factor == 0.0) continue;
      ab(i, k) = 0.0;
      for (std::size_t j = k + 1; j <= n; ++j) ab(i, j) -= factor * ab(k, j);
    }
  }

  DenseVector x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = ab(i, n);
    for (std::size_t j = i + 1; j < n; ++j) s -= ab(i, j) * x[j];
    x[i] = s / ab(i, i);
  }
  return x;
}

NormStats mean_std_per_channel(const DenseMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t c = data.cols();
  if (n < 2) throw EmptyInputError("mean_std_per_channel: need at least 2 samples");

  NormStats stats;
  stats.means.assign(c, 0.0);
  stats.stds.assign(c, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < c; ++j) stats.means[j] += row[j];
  }
  for (std::size_t j = 0; j < c; ++j) stats.means[j] /= static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      const double d = row[j] - stats.means[j];
      stats.stds[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < c; ++j) {
    double s = std::sqrt(stats.stds[j] / static_cast<double>(n));
    if (s < 1e-12) s = 1.0;  // keep downstream denormalization well-defined
    stats.stds[j] = s;
  }
  return stats;
}

}  // namespace latefuse
