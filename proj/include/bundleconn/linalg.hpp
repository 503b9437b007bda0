#pragma once

#include <vector>

#include "bundleconn/rational.hpp"

namespace bundleconn {

/// Dense row-major matrix over the rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(int rows, int cols);
  static RationalMatrix identity(int size);
  static RationalMatrix from_rows(const std::vector<RationalVector>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const Rational& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

  RationalMatrix transposed() const;
  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> data_;
};

/// Reduced row echelon form; returns the pivot columns.
std::vector<int> row_reduce(RationalMatrix& m);
int rank(RationalMatrix m);
Rational determinant(RationalMatrix m);
/// Throws SingularError when `m` is not invertible.
RationalMatrix inverse(const RationalMatrix& m);
/// Basis of {x : m x = 0}, one vector per free column.
std::vector<RationalVector> nullspace(RationalMatrix m);
/// Some solution of m x = rhs; throws InputError when the system is inconsistent.
RationalVector solve(const RationalMatrix& m, const RationalVector& rhs);

}  // namespace bundleconn
