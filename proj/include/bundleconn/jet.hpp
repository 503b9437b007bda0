#pragma once

// Truncated multivariate Taylor polynomials ("jets") over exact rationals.
//
// A JetPoly in N variables with truncation order r stores the Taylor
// coefficients of total degree <= r.  Binary operations truncate to the
// smaller of the two orders, so precision never inflates silently.
// Composition requires centered inner jets (zero constant term): callers
// re-center coordinates around the expansion point first.

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bundleconn/rational.hpp"

namespace bundleconn {

inline constexpr int kMaxVars = 16;

/// Exponent vector of a monomial.  Ordered graded-lexicographically.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int num_vars);
  MultiIndex(std::initializer_list<int> exponents);
  static MultiIndex from_span(std::span<const int> exponents);
  static MultiIndex unit(int num_vars, int var);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  int operator[](int var) const { return exps_[static_cast<std::size_t>(var)]; }
  std::vector<int> exponents() const;

  /// Copy with exponent of `var` shifted by `delta` (result must stay >= 0).
  MultiIndex shifted(int var, int delta) const;
  /// Same exponents, padded with zeros to `num_vars` variables.
  MultiIndex embedded(int num_vars) const;

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  std::array<std::uint8_t, kMaxVars> exps_{};
  std::uint8_t num_vars_ = 0;
  std::uint16_t degree_ = 0;
};

class JetPoly {
 public:
  using TermMap = std::map<MultiIndex, Rational>;

  JetPoly() = default;
  /// The zero jet.
  JetPoly(int num_vars, int order);

  static JetPoly constant(int num_vars, int order, const Rational& c);
  static JetPoly variable(int num_vars, int order, int var);
  static JetPoly monomial(int num_vars, int order, const MultiIndex& exps, const Rational& c);
  /// Normalizes: drops zero coefficients and terms above `order`.
  static JetPoly from_terms(int num_vars, int order, TermMap terms);

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  const TermMap& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  Rational coefficient(const MultiIndex& exps) const;
  Rational constant_term() const;
  /// Highest total degree present, -1 for the zero jet.
  int degree() const;
  /// Highest exponent of a single variable, -1 for the zero jet.
  int degree_in(int var) const;

  JetPoly truncated(int order) const;
  /// Reinterprets the jet in `num_vars` >= num_vars() variables (prefix embedding).
  JetPoly embedded(int num_vars) const;

  JetPoly operator-() const;
  JetPoly& operator+=(const JetPoly& other);
  JetPoly& operator-=(const JetPoly& other);
  JetPoly& operator*=(const Rational& c);

  friend JetPoly operator+(JetPoly a, const JetPoly& b) { return a += b; }
  friend JetPoly operator-(JetPoly a, const JetPoly& b) { return a -= b; }
  friend JetPoly operator*(const JetPoly& a, const JetPoly& b);
  friend JetPoly operator*(JetPoly a, const Rational& c) { return a *= c; }
  friend JetPoly operator*(const Rational& c, JetPoly a) { return a *= c; }

  /// Equality of normalized term maps (the truncation order is not compared).
  friend bool operator==(const JetPoly& a, const JetPoly& b);

 private:
  int num_vars_ = 0;
  int order_ = 0;
  TermMap terms_;
};

JetPoly add(const JetPoly& a, const JetPoly& b);
JetPoly mul(const JetPoly& a, const JetPoly& b);
/// Formal partial derivative; the order drops by one.
JetPoly partial(const JetPoly& p, int var);
Rational evaluate(const JetPoly& p, std::span<const Rational> point);

/// Substitutes `inners` for the variables of `outer`.  Inner jets must be
/// centered and share one variable count and order.
JetPoly compose(const JetPoly& outer, std::span<const JetPoly> inners);
/// Batch composition sharing the monomial-power cache across `outers`.
std::vector<JetPoly> compose_all(std::span<const JetPoly> outers, std::span<const JetPoly> inners);

/// Inverse of a centered square jet map with invertible linear part.
std::vector<JetPoly> invert_jet(std::span<const JetPoly> f);

/// The identity map x_i -> x_i as jets.
std::vector<JetPoly> identity_jet(int num_vars, int order);

/// Shifts the expansion point: p(x) -> p(x + point), computed on the stored
/// terms.  Exact whenever the stored jet is a genuine polynomial of degree <= order.
JetPoly recenter(const JetPoly& p, std::span<const Rational> point);

std::string to_string(const JetPoly& p);

/// Dense matrix of jets sharing one variable count.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, int num_vars, int order);

  static JetMatrix identity(int size, int num_vars, int order);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  JetPoly& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const JetPoly& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

  int order() const;
  JetMatrix truncated(int order) const;

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<JetPoly> data_;
};

/// Inverse of a square jet matrix whose constant part is invertible.
JetMatrix inverse(const JetMatrix& m);
JetMatrix compose(const JetMatrix& m, std::span<const JetPoly> inners);
JetMatrix partial(const JetMatrix& m, int var);

}  // namespace bundleconn
