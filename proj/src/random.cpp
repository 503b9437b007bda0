#include "bundleconn/random.hpp"

namespace bundleconn {

Rational Rng::rational(int max_num, int max_den) {
  std::uniform_int_distribution<int> num(-max_num, max_num);
  std::uniform_int_distribution<int> den(1, max_den);
  Rational r(num(engine_), den(engine_));
  r.canonicalize();
  return r;
}

Rational Rng::nonzero_rational(int max_num, int max_den) {
  Rational r = 0;
  while (r == 0) r = rational(max_num, max_den);
  return r;
}

int Rng::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

JetPoly Rng::poly(int num_vars, int order, int degree, int min_degree) {
  JetPoly::TermMap terms;
  std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
  while (true) {
    int d = 0;
    for (int v : e) d += v;
    if (d <= degree && d >= min_degree) {
      const Rational c = rational();
      if (c != 0) terms[MultiIndex::from_span(e)] = c;
    }
    int k = 0;
    while (k < num_vars) {
      if (++e[static_cast<std::size_t>(k)] <= degree) break;
      e[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == num_vars) break;
  }
  return JetPoly::from_terms(num_vars, order, std::move(terms));
}

std::vector<Rational> Rng::point(int size) {
  std::vector<Rational> p;
  for (int i = 0; i < size; ++i) p.push_back(rational());
  return p;
}

GeneralLinearConnection random_linear_connection(Rng& rng, int m, int n, int order, int degree) {
  GeneralLinearConnection K(m, n, order);
  for (std::size_t k = 0; k < K.coeffs.size(); ++k) K.coeffs.flat(k) = rng.poly(m, order, degree);
  return K;
}

ClassicalConnection random_classical_connection(Rng& rng, int m, int n, int order, bool symmetric, int degree) {
  ClassicalConnection L(m, n, order);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        if (symmetric && c < b) {
          L.l(a, b, c) = L.l(a, c, b);
        } else {
          L.l(a, b, c) = rng.poly(m, order, degree);
        }
      }
  L.symmetric = symmetric;
  return L;
}

TensorField random_tensor(Rng& rng, Space space, const Signature& sig, int order, int degree) {
  TensorField t(space, sig, order);
  for (std::size_t k = 0; k < t.size(); ++k) t.flat(k) = rng.poly(space.num_vars(), order, degree);
  return t;
}

}  // namespace bundleconn
