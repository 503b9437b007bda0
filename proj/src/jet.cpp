#include "bundleconn/jet.hpp"

#include <algorithm>
#include <sstream>

#include "bundleconn/error.hpp"
#include "bundleconn/linalg.hpp"

namespace bundleconn {

namespace {

void check_var_count(int n) {
  if (n < 0 || n > kMaxVars) throw InputError("variable count out of range: " + std::to_string(n));
}

void check_same_vars(const JetPoly& a, const JetPoly& b) {
  if (a.num_vars() != b.num_vars()) throw InputError("jet variable-count mismatch");
}

}  // namespace

// ---------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(int num_vars) {
  check_var_count(num_vars);
  num_vars_ = static_cast<std::uint8_t>(num_vars);
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents) {
  check_var_count(static_cast<int>(exponents.size()));
  num_vars_ = static_cast<std::uint8_t>(exponents.size());
  std::size_t i = 0;
  for (int e : exponents) {
    if (e < 0 || e > 255) throw InputError("exponent out of range");
    exps_[i++] = static_cast<std::uint8_t>(e);
    degree_ = static_cast<std::uint16_t>(degree_ + e);
  }
}

MultiIndex MultiIndex::from_span(std::span<const int> exponents) {
  check_var_count(static_cast<int>(exponents.size()));
  MultiIndex m(static_cast<int>(exponents.size()));
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 0 || exponents[i] > 255) throw InputError("exponent out of range");
    m.exps_[i] = static_cast<std::uint8_t>(exponents[i]);
    m.degree_ = static_cast<std::uint16_t>(m.degree_ + exponents[i]);
  }
  return m;
}

MultiIndex MultiIndex::unit(int num_vars, int var) {
  if (var < 0 || var >= num_vars) throw InputError("variable index out of range");
  return MultiIndex(num_vars).shifted(var, 1);
}

std::vector<int> MultiIndex::exponents() const {
  return std::vector<int>(exps_.begin(), exps_.begin() + num_vars_);
}

MultiIndex MultiIndex::shifted(int var, int delta) const {
  MultiIndex m = *this;
  const int e = exps_[static_cast<std::size_t>(var)] + delta;
  if (e < 0) throw InputError("negative exponent");
  m.exps_[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(e);
  m.degree_ = static_cast<std::uint16_t>(degree_ + delta);
  return m;
}

MultiIndex MultiIndex::embedded(int num_vars) const {
  if (num_vars < num_vars_) throw InputError("cannot embed into fewer variables");
  check_var_count(num_vars);
  MultiIndex m = *this;
  m.num_vars_ = static_cast<std::uint8_t>(num_vars);
  return m;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex m = a;
  for (std::size_t i = 0; i < kMaxVars; ++i) m.exps_[i] = static_cast<std::uint8_t>(a.exps_[i] + b.exps_[i]);
  m.degree_ = static_cast<std::uint16_t>(a.degree_ + b.degree_);
  m.num_vars_ = std::max(a.num_vars_, b.num_vars_);
  return m;
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
  // Within a degree, larger powers of earlier variables come first.
  for (std::size_t i = 0; i < kMaxVars; ++i) {
    if (a.exps_[i] != b.exps_[i]) return b.exps_[i] <=> a.exps_[i];
  }
  return a.num_vars_ <=> b.num_vars_;
}

// ------------------------------------------------------------------- JetPoly

JetPoly::JetPoly(int num_vars, int order) : num_vars_(num_vars), order_(order) {
  check_var_count(num_vars);
  if (order < 0) throw InputError("negative truncation order");
}

JetPoly JetPoly::constant(int num_vars, int order, const Rational& c) {
  JetPoly p(num_vars, order);
  if (c != 0) p.terms_.emplace(MultiIndex(num_vars), c);
  return p;
}

JetPoly JetPoly::variable(int num_vars, int order, int var) {
  return monomial(num_vars, order, MultiIndex::unit(num_vars, var), 1);
}

JetPoly JetPoly::monomial(int num_vars, int order, const MultiIndex& exps, const Rational& c) {
  JetPoly p(num_vars, order);
  if (exps.num_vars() != num_vars) throw InputError("monomial variable-count mismatch");
  if (c != 0 && exps.degree() <= order) p.terms_.emplace(exps, c);
  return p;
}

JetPoly JetPoly::from_terms(int num_vars, int order, TermMap terms) {
  JetPoly p(num_vars, order);
  for (auto it = terms.begin(); it != terms.end();) {
    if (it->first.num_vars() != num_vars) throw InputError("term variable-count mismatch");
    if (it->second == 0 || it->first.degree() > order) {
      it = terms.erase(it);
    } else {
      ++it;
    }
  }
  p.terms_ = std::move(terms);
  return p;
}

Rational JetPoly::coefficient(const MultiIndex& exps) const {
  auto it = terms_.find(exps);
  return it == terms_.end() ? Rational(0) : it->second;
}

Rational JetPoly::constant_term() const { return coefficient(MultiIndex(num_vars_)); }

int JetPoly::degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

int JetPoly::degree_in(int var) const {
  if (terms_.empty()) return -1;
  int d = 0;
  for (const auto& [mi, c] : terms_) d = std::max(d, mi[var]);
  return d;
}

JetPoly JetPoly::truncated(int order) const {
  JetPoly p(num_vars_, std::min(order, order_));
  for (const auto& [mi, c] : terms_) {
    if (mi.degree() > p.order_) break;
    p.terms_.emplace_hint(p.terms_.end(), mi, c);
  }
  return p;
}

JetPoly JetPoly::embedded(int num_vars) const {
  JetPoly p(num_vars, order_);
  for (const auto& [mi, c] : terms_) p.terms_.emplace(mi.embedded(num_vars), c);
  return p;
}

JetPoly JetPoly::operator-() const {
  JetPoly p = *this;
  for (auto& [mi, c] : p.terms_) c = -c;
  return p;
}

JetPoly& JetPoly::operator+=(const JetPoly& other) {
  check_same_vars(*this, other);
  if (other.order_ < order_) *this = truncated(other.order_);
  for (const auto& [mi, c] : other.terms_) {
    if (mi.degree() > order_) break;
    auto [it, inserted] = terms_.try_emplace(mi, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }
  return *this;
}

JetPoly& JetPoly::operator-=(const JetPoly& other) {
  check_same_vars(*this, other);
  if (other.order_ < order_) *this = truncated(other.order_);
  for (const auto& [mi, c] : other.terms_) {
    if (mi.degree() > order_) break;
    auto [it, inserted] = terms_.try_emplace(mi, -c);
    if (!inserted) {
      it->second -= c;
      if (it->second == 0) terms_.erase(it);
    }
  }
  return *this;
}

JetPoly& JetPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
  } else {
    for (auto& [mi, v] : terms_) v *= c;
  }
  return *this;
}

JetPoly operator*(const JetPoly& a, const JetPoly& b) {
  check_same_vars(a, b);
  JetPoly p(a.num_vars_, std::min(a.order_, b.order_));
  const int order = p.order_;
  Rational prod;
  for (const auto& [ma, ca] : a.terms_) {
    if (ma.degree() > order) break;
    for (const auto& [mb, cb] : b.terms_) {
      if (ma.degree() + mb.degree() > order) break;
      prod = ca * cb;
      auto [it, inserted] = p.terms_.try_emplace(ma + mb, prod);
      if (!inserted) it->second += prod;
    }
  }
  std::erase_if(p.terms_, [](const auto& kv) { return kv.second == 0; });
  return p;
}

bool operator==(const JetPoly& a, const JetPoly& b) {
  return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
}

JetPoly add(const JetPoly& a, const JetPoly& b) { return a + b; }
JetPoly mul(const JetPoly& a, const JetPoly& b) { return a * b; }

JetPoly partial(const JetPoly& p, int var) {
  if (var < 0 || var >= p.num_vars()) throw InputError("partial: variable index out of range");
  if (p.order() < 1) throw OrderError("partial: jet of order 0 has no derivative");
  JetPoly::TermMap terms;
  for (const auto& [mi, c] : p.terms()) {
    const int e = mi[var];
    if (e == 0) continue;
    terms.emplace(mi.shifted(var, -1), c * e);
  }
  return JetPoly::from_terms(p.num_vars(), p.order() - 1, std::move(terms));
}

Rational evaluate(const JetPoly& p, std::span<const Rational> point) {
  if (static_cast<int>(point.size()) != p.num_vars()) throw InputError("evaluate: point length mismatch");
  Rational sum = 0;
  Rational term;
  for (const auto& [mi, c] : p.terms()) {
    term = c;
    for (int v = 0; v < p.num_vars(); ++v) {
      for (int e = 0; e < mi[v]; ++e) term *= point[static_cast<std::size_t>(v)];
    }
    sum += term;
  }
  return sum;
}

namespace {

// Powers inner[v]^k, built lazily.
class PowerCache {
 public:
  PowerCache(std::span<const JetPoly> inners, int order) : inners_(inners), order_(order) {
    powers_.resize(inners.size());
  }

  const JetPoly& power(int var, int k) {
    auto& list = powers_[static_cast<std::size_t>(var)];
    if (list.empty()) {
      const auto& inner = inners_[static_cast<std::size_t>(var)];
      list.push_back(JetPoly::constant(inner.num_vars(), order_, 1));
    }
    while (static_cast<int>(list.size()) <= k) {
      list.push_back(list.back() * inners_[static_cast<std::size_t>(var)].truncated(order_));
    }
    return list[static_cast<std::size_t>(k)];
  }

 private:
  std::span<const JetPoly> inners_;
  int order_;
  std::vector<std::vector<JetPoly>> powers_;
};

int check_inners(std::span<const JetPoly> inners) {
  if (inners.empty()) return 0;
  const int nv = inners.front().num_vars();
  int order = inners.front().order();
  for (const auto& f : inners) {
    if (f.num_vars() != nv) throw InputError("compose: inner jets disagree on variable count");
    if (f.constant_term() != 0) throw InputError("compose: inner jet has nonzero constant term");
    order = std::min(order, f.order());
  }
  return order;
}

JetPoly compose_with(const JetPoly& outer, std::span<const JetPoly> inners, int inner_order,
                     PowerCache& cache, int inner_vars) {
  if (static_cast<int>(inners.size()) != outer.num_vars()) throw InputError("compose: arity mismatch");
  const int order = std::min(outer.order(), inner_order);
  JetPoly result(inner_vars, order);
  for (const auto& [mi, c] : outer.terms()) {
    if (mi.degree() > order) break;
    JetPoly term = JetPoly::constant(inner_vars, order, c);
    for (int v = 0; v < outer.num_vars(); ++v) {
      if (mi[v] == 0) continue;
      term = term * cache.power(v, mi[v]);
    }
    result += term;
  }
  return result;
}

}  // namespace

JetPoly compose(const JetPoly& outer, std::span<const JetPoly> inners) {
  if (static_cast<int>(inners.size()) != outer.num_vars()) throw InputError("compose: arity mismatch");
  if (inners.empty()) return outer;
  const int order = check_inners(inners);
  PowerCache cache(inners, std::min(order, outer.order()));
  return compose_with(outer, inners, order, cache, inners.front().num_vars());
}

std::vector<JetPoly> compose_all(std::span<const JetPoly> outers, std::span<const JetPoly> inners) {
  std::vector<JetPoly> out;
  out.reserve(outers.size());
  if (inners.empty()) {
    for (const auto& o : outers) {
      if (o.num_vars() != 0) throw InputError("compose: arity mismatch");
      out.push_back(o);
    }
    return out;
  }
  const int order = check_inners(inners);
  PowerCache cache(inners, order);
  for (const auto& o : outers) out.push_back(compose_with(o, inners, order, cache, inners.front().num_vars()));
  return out;
}

std::vector<JetPoly> identity_jet(int num_vars, int order) {
  std::vector<JetPoly> id;
  id.reserve(static_cast<std::size_t>(num_vars));
  for (int v = 0; v < num_vars; ++v) id.push_back(JetPoly::variable(num_vars, order, v));
  return id;
}

std::vector<JetPoly> invert_jet(std::span<const JetPoly> f) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return {};
  const int order = check_inners(f);
  for (const auto& fi : f) {
    if (fi.num_vars() != n) throw InputError("invert_jet: system is not square");
  }
  RationalMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = f[static_cast<std::size_t>(i)].coefficient(MultiIndex::unit(n, j));
  RationalMatrix a_inv;
  try {
    a_inv = inverse(a);
  } catch (const SingularError&) {
    throw SingularError("invert_jet: singular linear part");
  }
  // Nonlinear remainder N = f - A x.
  std::vector<JetPoly> nonlinear;
  for (int i = 0; i < n; ++i) {
    JetPoly r = f[static_cast<std::size_t>(i)].truncated(order);
    for (int j = 0; j < n; ++j) {
      r -= JetPoly::monomial(n, order, MultiIndex::unit(n, j), a(i, j));
    }
    nonlinear.push_back(std::move(r));
  }
  const auto x = identity_jet(n, order);
  auto apply_a_inv = [&](const std::vector<JetPoly>& v) {
    std::vector<JetPoly> out;
    for (int i = 0; i < n; ++i) {
      JetPoly s(n, order);
      for (int j = 0; j < n; ++j) {
        if (a_inv(i, j) != 0) s += v[static_cast<std::size_t>(j)] * a_inv(i, j);
      }
      out.push_back(std::move(s));
    }
    return out;
  };
  // g = A^{-1}(x - N(g)); each pass fixes one more degree.
  std::vector<JetPoly> g = apply_a_inv(x);
  for (int pass = 1; pass < order; ++pass) {
    const auto ng = compose_all(nonlinear, g);
    std::vector<JetPoly> rhs;
    for (int i = 0; i < n; ++i) rhs.push_back(x[static_cast<std::size_t>(i)] - ng[static_cast<std::size_t>(i)]);
    g = apply_a_inv(rhs);
  }
  return g;
}

JetPoly recenter(const JetPoly& p, std::span<const Rational> point) {
  if (static_cast<int>(point.size()) != p.num_vars()) throw InputError("recenter: point length mismatch");
  const int nv = p.num_vars();
  std::vector<JetPoly> shifted;
  for (int v = 0; v < nv; ++v) {
    shifted.push_back(JetPoly::variable(nv, p.order(), v) +
                      JetPoly::constant(nv, p.order(), point[static_cast<std::size_t>(v)]));
  }
  JetPoly result(nv, p.order());
  for (const auto& [mi, c] : p.terms()) {
    JetPoly term = JetPoly::constant(nv, p.order(), c);
    for (int v = 0; v < nv; ++v)
      for (int e = 0; e < mi[v]; ++e) term = term * shifted[static_cast<std::size_t>(v)];
    result += term;
  }
  return result;
}

std::string to_string(const JetPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [mi, c] : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << to_string(c);
    for (int v = 0; v < p.num_vars(); ++v) {
      if (mi[v] == 0) continue;
      os << "*x" << v;
      if (mi[v] > 1) os << '^' << mi[v];
    }
  }
  return os.str();
}

// ----------------------------------------------------------------- JetMatrix

JetMatrix::JetMatrix(int rows, int cols, int num_vars, int order)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), JetPoly(num_vars, order)) {}

JetMatrix JetMatrix::identity(int size, int num_vars, int order) {
  JetMatrix m(size, size, num_vars, order);
  for (int i = 0; i < size; ++i) m(i, i) = JetPoly::constant(num_vars, order, 1);
  return m;
}

int JetMatrix::order() const {
  int o = 1 << 20;
  for (const auto& p : data_) o = std::min(o, p.order());
  return o;
}

JetMatrix JetMatrix::truncated(int order) const {
  JetMatrix m = *this;
  for (auto& p : m.data_) p = p.truncated(order);
  return m;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols_ != b.rows_) throw InputError("jet matrix product shape mismatch");
  if (a.data_.empty() || b.data_.empty()) return JetMatrix(a.rows_, b.cols_, 0, 0);
  const int nv = a.data_.front().num_vars();
  const int order = std::min(a.order(), b.order());
  JetMatrix c(a.rows_, b.cols_, nv, order);
  for (int i = 0; i < a.rows_; ++i)
    for (int j = 0; j < b.cols_; ++j)
      for (int k = 0; k < a.cols_; ++k) {
        if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
        c(i, j) += a(i, k) * b(k, j);
      }
  return c;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw InputError("jet matrix sum shape mismatch");
  JetMatrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw InputError("jet matrix difference shape mismatch");
  JetMatrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

JetMatrix inverse(const JetMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("inverse of a non-square jet matrix");
  const int n = m.rows();
  if (n == 0) return m;
  const int nv = m(0, 0).num_vars();
  const int order = m.order();
  RationalMatrix m0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m0(i, j) = m(i, j).constant_term();
  const RationalMatrix m0_inv = inverse(m0);
  JetMatrix c_inv(n, n, nv, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c_inv(i, j) = JetPoly::constant(nv, order, m0_inv(i, j));
  // M = M0 (I + M0^{-1} N)  =>  M^{-1} = sum_k (-M0^{-1} N)^k M0^{-1}.
  JetMatrix nil = c_inv * (m - JetMatrix(n, n, nv, order));
  for (int i = 0; i < n; ++i) nil(i, i) -= JetPoly::constant(nv, order, 1);
  JetMatrix neg_nil = JetMatrix(n, n, nv, order) - nil;
  JetMatrix result = c_inv;
  JetMatrix power = c_inv;
  for (int k = 1; k <= order; ++k) {
    power = neg_nil * power;
    result = result + power;
  }
  return result;
}

JetMatrix compose(const JetMatrix& m, std::span<const JetPoly> inners) {
  std::vector<JetPoly> flat;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  const auto out = compose_all(flat, inners);
  const int nv = inners.empty() ? 0 : inners.front().num_vars();
  JetMatrix r(m.rows(), m.cols(), nv, 0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = out[static_cast<std::size_t>(i * m.cols() + j)];
  return r;
}

JetMatrix partial(const JetMatrix& m, int var) {
  JetMatrix r = m;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = partial(m(i, j), var);
  return r;
}

}  // namespace bundleconn
