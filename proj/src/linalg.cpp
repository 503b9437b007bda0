#include "bundleconn/linalg.hpp"

#include <utility>

#include "bundleconn/error.hpp"

namespace bundleconn {

RationalMatrix::RationalMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

RationalMatrix RationalMatrix::identity(int size) {
  RationalMatrix m(size, size);
  for (int i = 0; i < size; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::from_rows(const std::vector<RationalVector>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
  RationalMatrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c) {
      throw InputError("ragged rows in matrix");
    }
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

RationalMatrix RationalMatrix::transposed() const {
  RationalMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols_ != b.rows_) throw InputError("matrix product shape mismatch");
  RationalMatrix c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      if (a(i, k) == 0) continue;
      for (int j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

std::vector<int> row_reduce(RationalMatrix& m) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int pivot = -1;
    for (int r = row; r < m.rows(); ++r) {
      if (m(r, col) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    if (pivot != row)
      for (int c = 0; c < m.cols(); ++c) std::swap(m(pivot, c), m(row, c));
    const Rational inv = 1 / m(row, col);
    for (int c = col; c < m.cols(); ++c) m(row, c) *= inv;
    for (int r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col) == 0) continue;
      const Rational f = m(r, col);
      for (int c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

int rank(RationalMatrix m) { return static_cast<int>(row_reduce(m).size()); }

Rational determinant(RationalMatrix m) {
  if (m.rows() != m.cols()) throw InputError("determinant of a non-square matrix");
  const int n = m.rows();
  Rational det = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (m(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) return 0;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n; ++r) {
      if (m(r, col) == 0) continue;
      const Rational f = m(r, col) / m(col, col);
      for (int c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

RationalMatrix inverse(const RationalMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("inverse of a non-square matrix");
  const int n = m.rows();
  RationalMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  const auto pivots = row_reduce(aug);
  if (static_cast<int>(pivots.size()) < n || pivots[static_cast<std::size_t>(n - 1)] != n - 1) {
    throw SingularError("matrix is singular");
  }
  RationalMatrix inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

std::vector<RationalVector> nullspace(RationalMatrix m) {
  const auto pivots = row_reduce(m);
  std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
  for (int p : pivots) is_pivot[static_cast<std::size_t>(p)] = true;
  std::vector<RationalVector> basis;
  for (int free = 0; free < m.cols(); ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    RationalVector v(static_cast<std::size_t>(m.cols()));
    v[static_cast<std::size_t>(free)] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      v[static_cast<std::size_t>(pivots[r])] = -m(static_cast<int>(r), free);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

RationalVector solve(const RationalMatrix& m, const RationalVector& rhs) {
  if (static_cast<int>(rhs.size()) != m.rows()) throw InputError("right-hand side length mismatch");
  RationalMatrix aug(m.rows(), m.cols() + 1);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
    aug(i, m.cols()) = rhs[static_cast<std::size_t>(i)];
  }
  const auto pivots = row_reduce(aug);
  RationalVector x(static_cast<std::size_t>(m.cols()));
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    if (pivots[r] == m.cols()) throw InputError("inconsistent linear system");
    x[static_cast<std::size_t>(pivots[r])] = aug(static_cast<int>(r), m.cols());
  }
  return x;
}

}  // namespace bundleconn
