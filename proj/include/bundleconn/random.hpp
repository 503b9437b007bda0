#pragma once

// Seeded generators for property tests and CLI suites.  Coefficients are
// rationals with |num| <= 5 and den <= 3; polynomials have degree <= 2.

#include <cstdint>
#include <random>

#include "bundleconn/connections.hpp"

namespace bundleconn {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rational rational(int max_num = 5, int max_den = 3);
  Rational nonzero_rational(int max_num = 5, int max_den = 3);
  int integer(int lo, int hi);
  /// Random polynomial of total degree <= `degree` (minimum degree `min_degree`).
  JetPoly poly(int num_vars, int order, int degree = 2, int min_degree = 0);
  std::vector<Rational> point(int size);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

GeneralLinearConnection random_linear_connection(Rng& rng, int m, int n, int order, int degree = 2);
ClassicalConnection random_classical_connection(Rng& rng, int m, int n, int order, bool symmetric, int degree = 2);
TensorField random_tensor(Rng& rng, Space space, const Signature& sig, int order, int degree = 2);

}  // namespace bundleconn
