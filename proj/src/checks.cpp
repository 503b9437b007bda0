#include "bundleconn/checks.hpp"

#include <algorithm>

namespace bundleconn {

std::optional<Mismatch> first_mismatch(const TensorField& a, const TensorField& b, const std::string& what) {
  if (a.signature() != b.signature() || a.size() != b.size()) return Mismatch{what + ": shape", 0, "", ""};
  const int order = std::min(a.order(), b.order());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const JetPoly x = a.flat(k).truncated(order);
    const JetPoly y = b.flat(k).truncated(order);
    if (!(x == y)) return Mismatch{what, k, to_string(x), to_string(y)};
  }
  return std::nullopt;
}

namespace {

// (nabla^D_X Y)^A = X^C (d_C Y^A - D_B^A_C Y^B).
TensorField nabla_D(const ClassicalConnectionOnE& D, const TensorField& X, const TensorField& Y) {
  const int N = D.m() + D.n();
  const int order = std::min({D.order(), X.order(), Y.order() - 1});
  TensorField out(X.space(), {SlotKind::TotalUp}, order);
  for (int A = 0; A < N; ++A) {
    JetPoly v(X.space().num_vars(), order);
    for (int C = 0; C < N; ++C) {
      JetPoly inner = partial(Y.at({A}), C);
      for (int B = 0; B < N; ++B) inner -= D.d(B, A, C) * Y.at({B});
      v += X.at({C}) * inner;
    }
    out.at({A}) = v.truncated(order);
  }
  return out;
}

TensorField along(const TensorField& field, const TensorField& X, const GeneralLinearConnection& K,
                  const ClassicalConnection& L) {
  return contract(tensor_product(covariant_differential(field, K, L), X), 2, 1);
}

std::optional<Mismatch> expect_zero(const TensorField& t, const std::string& what) {
  return first_mismatch(t, t * Rational(0), what);
}

}  // namespace

std::optional<Mismatch> check_prop21(const ClassicalConnection& L, const GeneralLinearConnection& K, Rng& rng) {
  const int m = K.m();
  const int n = K.n();
  const int o = std::min(L.order(), K.order());
  const Space M = Space::base(m, n);
  const auto X = random_tensor(rng, M, {SlotKind::BaseUp}, o);
  const auto Y = random_tensor(rng, M, {SlotKind::BaseUp}, o);
  const auto s = random_tensor(rng, M, {SlotKind::FiberUp}, o);
  const auto sigma = random_tensor(rng, M, {SlotKind::FiberUp}, o);
  const auto D = induce_D(L, K);
  const auto hX = horizontal_lift(K, X);
  const auto hY = horizontal_lift(K, Y);
  const auto sV = vertical_lift(s);
  if (auto f = first_mismatch(nabla_D(D, hX, hY), horizontal_lift(K, along(Y, X, K, L)), "nabla_hX hY")) return f;
  if (auto f = first_mismatch(nabla_D(D, hX, sV), vertical_lift(along(s, X, K, L)), "nabla_hX sV")) return f;
  if (auto f = expect_zero(nabla_D(D, sV, hX), "nabla_sV hX")) return f;
  return expect_zero(nabla_D(D, sV, vertical_lift(sigma)), "nabla_sV sigmaV");
}

std::optional<Mismatch> check_chi(const ClassicalConnection& L, const GeneralLinearConnection& K) {
  return first_mismatch(chi(induce_D(L, K)).coeffs, induce_Gamma(L, K).coeffs, "chi(D) vs Gamma");
}

std::optional<Mismatch> check_geometric(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                        const Params15& p15, const Params14& p14) {
  if (auto f = first_mismatch(phi15_geometric(L, K, p15), phi15(L, K, p15), "phi15 geometric vs coordinate")) return f;
  return first_mismatch(phi14_geometric(L, K, p14), phi14(L, K, p14), "phi14 geometric vs coordinate");
}

std::optional<Mismatch> check_kernel_identity(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                              const Params15& p15) {
  Params15 a3;
  a3.a3 = 1;
  Params15 h2;
  h2.h2 = 1;
  const auto lifted = chi_tilde(phi15_geometric(L, K, a3));
  const auto nu_term = chi_tilde(phi15_geometric(L, K, h2)) * Rational(-1);
  if (auto f = first_mismatch(lifted, nu_term, "chi~ identity")) return f;
  return first_mismatch(chi(induce_D_tilde(L, K, p15)).coeffs, induce_Gamma_tilde(L, K, params15_to_14(p15)).coeffs,
                        "chi(D~) vs Gamma~");
}

std::optional<Mismatch> check_affine(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                     const Params14& p14) {
  const auto G = induce_Gamma_tilde(L, K, p14);
  const Space J = Space::jet(K.m(), K.n());
  const int first = J.ylam_var(0, 0);
  for (std::size_t c = 0; c < G.coeffs.size(); ++c)
    for (int u = first; u < J.num_vars(); ++u) {
      const JetPoly du = partial(G.coeffs.flat(c), u);
      for (int v = u; v < J.num_vars(); ++v) {
        const JetPoly d2 = partial(du, v);
        if (!d2.is_zero()) return Mismatch{"second derivative in jet variables", c, to_string(d2), "0"};
      }
    }
  return std::nullopt;
}

int params15_to_14_kernel_dimension() { return static_cast<int>(nullspace(params15_to_14_matrix()).size()); }

}  // namespace bundleconn
