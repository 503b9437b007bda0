#include <gtest/gtest.h>

#include "bundleconn/error.hpp"
#include "bundleconn/natural.hpp"
#include "bundleconn/random.hpp"

using namespace bundleconn;

namespace {

// Compares after truncating both sides to their common order.
void expect_tensor_eq(const TensorField& a, const TensorField& b) {
  ASSERT_EQ(a.signature(), b.signature());
  ASSERT_EQ(a.size(), b.size());
  const int order = std::min(a.order(), b.order());
  ASSERT_GE(order, 0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.flat(k).truncated(order), b.flat(k).truncated(order))
        << "component " << k << ": " << to_string(a.flat(k)) << " vs " << to_string(b.flat(k));
  }
}

// (nabla^D_X Y)^A = X^C (d_C Y^A - D_B^A_C Y^B) for TotalUp fields over E.
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

// X^n nabla_n of a one-slot field over M via the library's covariant differential.
TensorField along(const TensorField& field, const TensorField& X, const GeneralLinearConnection& K,
                  const ClassicalConnection& L) {
  const TensorField d = covariant_differential(field, K, L);
  return contract(tensor_product(d, X), 2, 1);
}

Params15 random_p15(Rng& rng) {
  std::vector<Rational> v;
  for (int k = 0; k < Params15::kSize; ++k) v.push_back(rng.rational());
  return Params15::from_values(v);
}

Params14 random_p14(Rng& rng) {
  std::vector<Rational> v;
  for (int k = 0; k < Params14::kSize; ++k) v.push_back(rng.rational());
  return Params14::from_values(v);
}

std::vector<Rational> random_point(Rng& rng, int num_vars) {
  std::vector<Rational> p;
  for (int v = 0; v < num_vars; ++v) p.push_back(rng.rational());
  return p;
}

}  // namespace

TEST(InduceD, ZeroAndConstantK) {
  EXPECT_TRUE(induce_D(ClassicalConnection(2, 2, 2), GeneralLinearConnection(2, 2, 2)).coeffs.is_zero());

  const int m = 2;
  const int n = 2;
  Rng rng(21);
  GeneralLinearConnection K(m, n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < m; ++l) K.k(i, j, l) = JetPoly::constant(m, 3, rng.rational());
  const auto D = induce_D(ClassicalConnection(m, n, 3), K);
  const int nv = m + n;
  for (int i = 0; i < n; ++i)
    for (int mu = 0; mu < m; ++mu) {
      for (int nu = 0; nu < m; ++nu) {
        JetPoly expect(nv, 2);
        for (int r = 0; r < n; ++r)
          for (int p = 0; p < n; ++p)
            expect -= JetPoly::constant(nv, 2, K.k(i, r, nu).constant_term() * K.k(r, p, mu).constant_term()) *
                      JetPoly::variable(nv, 2, m + p);
        EXPECT_EQ(D.d(mu, m + i, nu), expect);
        EXPECT_TRUE(D.d(mu, nu, m + i).is_zero());
        EXPECT_TRUE(D.d(m + i, mu, nu).is_zero());
      }
      for (int k = 0; k < n; ++k) {
        EXPECT_EQ(D.d(mu, m + i, m + k).constant_term(), K.k(i, k, mu).constant_term());
        EXPECT_EQ(D.d(m + k, m + i, mu).constant_term(), K.k(i, k, mu).constant_term());
        EXPECT_TRUE(D.d(m + k, m + i, m + i).is_zero());
      }
    }
}

TEST(InduceD, FourDefiningProperties) {
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const int o = 4;
    const auto L = random_classical_connection(rng, m, n, o, false);
    const auto K = random_linear_connection(rng, m, n, o);
    const Space M = Space::base(m, n);
    const auto X = random_tensor(rng, M, {SlotKind::BaseUp}, o);
    const auto Y = random_tensor(rng, M, {SlotKind::BaseUp}, o);
    const auto s = random_tensor(rng, M, {SlotKind::FiberUp}, o);
    const auto sigma = random_tensor(rng, M, {SlotKind::FiberUp}, o);
    const auto D = induce_D(L, K);
    const auto hX = horizontal_lift(K, X);
    const auto hY = horizontal_lift(K, Y);
    const auto sV = vertical_lift(s);
    const auto sigmaV = vertical_lift(sigma);

    expect_tensor_eq(nabla_D(D, hX, hY), horizontal_lift(K, along(Y, X, K, L)));
    expect_tensor_eq(nabla_D(D, hX, sV), vertical_lift(along(s, X, K, L)));
    EXPECT_TRUE(nabla_D(D, sV, hX).is_zero());
    EXPECT_TRUE(nabla_D(D, sV, sigmaV).is_zero());
  }
}

TEST(InduceD, OrderChecked) {
  EXPECT_THROW(induce_D(ClassicalConnection(2, 1, 0), GeneralLinearConnection(2, 1, 0)), OrderError);
}

TEST(Lifts, Complementarity) {
  Rng rng(23);
  const auto K = random_linear_connection(rng, 2, 2, 3);
  const Space M = Space::base(2, 2);
  const auto X = random_tensor(rng, M, {SlotKind::BaseUp}, 3);
  const auto s = random_tensor(rng, M, {SlotKind::FiberUp}, 3);
  const auto nu = vertical_projection(K);
  // nu_K(h^K X) = 0 and nu_K(s^V) = s.
  EXPECT_TRUE(contract(tensor_product(nu, horizontal_lift(K, X)), 2, 0).is_zero());
  expect_tensor_eq(contract(tensor_product(nu, vertical_lift(s)), 2, 0), embed(s, Space::total(2, 2)));

  const auto h0 = horizontal_lift(GeneralLinearConnection(2, 2, 3), X);
  for (int l = 0; l < 2; ++l) EXPECT_EQ(h0.at({l}), X.at({l}).embedded(4));
  for (int i = 0; i < 2; ++i) EXPECT_TRUE(h0.at({2 + i}).is_zero());
  EXPECT_THROW(horizontal_lift(K, s), InputError);
}

TEST(ContactMaps, ThetaAfterDVanishes) {
  Rng rng(24);
  const int m = 2;
  const int n = 2;
  const auto c = contact_maps(m, n, 2);
  EXPECT_TRUE(contract(tensor_product(c.d, c.theta), 1, 2).is_zero());
  const auto pt = random_point(rng, Space::jet(m, n).num_vars());
  const auto cp = contact_maps(m, n, pt);
  EXPECT_TRUE(contract(tensor_product(cp.d, cp.theta), 1, 2).is_zero());

  // theta(h^K X) = (K y - y_l) X.
  const auto K = random_linear_connection(rng, m, n, 3);
  const auto X = random_tensor(rng, Space::base(m, n), {SlotKind::BaseUp}, 3);
  const Space J = Space::jet(m, n);
  const auto lhs = contract(tensor_product(c.theta, embed(horizontal_lift(K, X), J)), 2, 0);
  for (int i = 0; i < n; ++i) {
    JetPoly expect(J.num_vars(), 2);
    for (int l = 0; l < m; ++l) {
      JetPoly f = -JetPoly::variable(J.num_vars(), 2, J.ylam_var(i, l));
      for (int j = 0; j < n; ++j) f += K.k(i, j, l).embedded(J.num_vars()) * JetPoly::variable(J.num_vars(), 2, J.y_var(j));
      expect += f * X.at({l}).embedded(J.num_vars());
    }
    EXPECT_EQ(lhs.at({i}).truncated(2), expect.truncated(2));
  }
}

TEST(SOf, TraceAndSpecialCases) {
  Rng rng(25);
  const int m = 3;
  const auto L = random_classical_connection(rng, m, 1, 3, false);
  const auto T = torsion_split(L).torsion;
  EXPECT_EQ(S_of(L, 1, 0, 0), T);
  EXPECT_TRUE(S_of(random_classical_connection(rng, m, 1, 3, true), 1, 2, 3).is_zero());
  const Rational a1(2), a2(-1), a3(1, 3);
  const auto S = S_of(L, a1, a2, a3);
  const auto Th = torsion_trace(T);
  for (int nu = 0; nu < m; ++nu) {
    JetPoly tr(m, 3);
    for (int l = 0; l < m; ++l) tr += S.at({l, l, nu});
    EXPECT_EQ(tr, Th.at({nu}) * (a1 + m * a2 + a3));
  }
}

TEST(GOf, SymmetricFlatVanishesAndD1IsValueTrace) {
  Rng rng(26);
  const auto Ls = random_classical_connection(rng, 2, 2, 3, true);
  Params15 all;
  for (auto* f : {&all.b1, &all.b2, &all.b3, &all.c1, &all.c2, &all.c3, &all.d1, &all.d2, &all.e1}) *f = 1;
  all.d1 = 0;
  all.d2 = 0;
  EXPECT_TRUE(G_of(Ls, GeneralLinearConnection(2, 2, 3), all).is_zero());

  const auto L = random_classical_connection(rng, 3, 1, 3, false);
  const auto K = random_linear_connection(rng, 3, 1, 3);
  Params15 d1;
  d1.d1 = 1;
  const auto G = G_of(L, K, d1);
  const auto R = curvature_Lambda(torsion_split(L).sym);  // (BaseDown r, BaseUp l, BaseDown m, BaseDown n)
  // C^1_1 R: the value index contracted with the first lower index.
  TensorField expect(Space::base(3, 1), {SlotKind::BaseDown, SlotKind::BaseDown}, R.order());
  for (int r = 0; r < 3; ++r)
    for (int n2 = 0; n2 < 3; ++n2) {
      JetPoly v(3, R.order());
      for (int l = 0; l < 3; ++l) v += R.at({l, l, r, n2});
      expect.at({r, n2}) = v;
    }
  expect_tensor_eq(G, expect);
}

TEST(Phi15, SpecialCases) {
  Rng rng(27);
  const auto Ls = random_classical_connection(rng, 2, 2, 3, true);
  const GeneralLinearConnection flat(2, 2, 3);
  // A symmetric L still has curvature, so the d-terms are switched off too.
  auto p = random_p15(rng);
  p.d1 = p.d2 = p.e2 = 0;
  EXPECT_TRUE(phi15(Ls, flat, p).is_zero());

  const auto L = random_classical_connection(rng, 2, 2, 3, false);
  const auto K = random_linear_connection(rng, 2, 2, 3);
  Params15 e2;
  e2.e2 = 1;
  const auto Phi = phi15(L, K, e2);
  const auto RK = curvature_K(K);
  const Space E = Space::total(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int mu = 0; mu < 2; ++mu)
      for (int nu = 0; nu < 2; ++nu) {
        JetPoly expect(E.num_vars(), RK.order());
        for (int j = 0; j < 2; ++j)
          expect += RK.at({j, i, mu, nu}).embedded(E.num_vars()) * JetPoly::variable(E.num_vars(), 3, E.y_var(j));
        EXPECT_EQ(Phi.at({mu, 2 + i, nu}).truncated(Phi.order()), expect.truncated(Phi.order()));
      }
}

TEST(Phi15, GeometricEqualsCoordinate) {
  Rng rng(28);
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    const auto p = random_p15(rng);
    expect_tensor_eq(phi15_geometric(L, K, p), phi15(L, K, p));
  }
}

TEST(Phi14, GeometricEqualsCoordinate) {
  Rng rng(29);
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    const auto p = random_p14(rng);
    expect_tensor_eq(phi14_geometric(L, K, p), phi14(L, K, p));
  }
}

TEST(InduceDTilde, LinearInParams) {
  Rng rng(30);
  const auto L = random_classical_connection(rng, 2, 2, 3, false);
  const auto K = random_linear_connection(rng, 2, 2, 3);
  expect_tensor_eq(induce_D_tilde(L, K, Params15{}).coeffs, induce_D(L, K).coeffs);
  const auto p = random_p15(rng);
  const auto q = random_p15(rng);
  std::vector<Rational> diff;
  for (int k = 0; k < Params15::kSize; ++k) diff.push_back(p.values()[k] - q.values()[k]);
  expect_tensor_eq(induce_D_tilde(L, K, p).coeffs - induce_D_tilde(L, K, q).coeffs,
                   phi15(L, K, Params15::from_values(diff)));
}

TEST(Chi, ZeroAndInduceGamma) {
  EXPECT_TRUE(chi(ClassicalConnectionOnE(2, 2, 2)).coeffs.is_zero());
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const int m = 1 + t % 3;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, t % 4 == 0);
    const auto K = random_linear_connection(rng, m, n, 3);
    expect_tensor_eq(chi(induce_D(L, K)).coeffs, induce_Gamma(L, K).coeffs);
  }
}

TEST(Chi, DependsOnTorsion) {
  Rng rng(32);
  const auto L = random_classical_connection(rng, 2, 1, 3, false);
  const auto K = random_linear_connection(rng, 2, 1, 3);
  const auto sym = torsion_split(L).sym;
  EXPECT_FALSE(induce_Gamma(L, K).coeffs == induce_Gamma(sym, K).coeffs);
}

TEST(ChiTilde, AffineSplitting) {
  Rng rng(33);
  for (int t = 0; t < 5; ++t) {
    const auto L = random_classical_connection(rng, 2, 2, 3, false);
    const auto K = random_linear_connection(rng, 2, 2, 3);
    const auto p = random_p15(rng);
    const auto D = induce_D(L, K);
    const auto Phi = phi15(L, K, p);
    const auto lhs = chi(induce_D_tilde(L, K, p)).coeffs - chi(D).coeffs;
    const std::vector<int> to_gamma{0, 2, 1};
    expect_tensor_eq(lhs, permute(chi_tilde(Phi), to_gamma));
  }
}

TEST(ChiTilde, VerticalBaseFormIsReinterpreted) {
  Rng rng(34);
  const int m = 2;
  const int n = 2;
  const Space E = Space::total(m, n);
  TensorField Phi(E, {SlotKind::TotalDown, SlotKind::TotalUp, SlotKind::TotalDown}, 2);
  for (int A = 0; A < m + n; ++A)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < m; ++l) Phi.at({A, m + i, l}) = JetPoly::constant(E.num_vars(), 2, rng.rational());
  const auto out = chi_tilde(Phi);
  for (int A = 0; A < m + n; ++A)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < m; ++l) EXPECT_EQ(out.at({A, l, i}), Phi.at({A, m + i, l}).embedded(Space::jet(m, n).num_vars()));
}

TEST(ChiTilde, LiftAndProjectionTermsCancelOnTorsionfulScenes) {
  Rng rng(35);
  Params15 a3;
  a3.a3 = 1;
  Params15 h2;
  h2.h2 = 1;
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 2;
    const auto L = random_classical_connection(rng, m, 2, 3, false);
    ASSERT_FALSE(torsion_split(L).torsion.is_zero());
    const auto K = random_linear_connection(rng, m, 2, 3);
    const auto lifted = chi_tilde(phi15_geometric(L, K, a3));  // h^K(T^ (x) I)
    const auto nu_term = chi_tilde(phi15_geometric(L, K, h2));  // T^ (x) nu_K
    ASSERT_FALSE(lifted.is_zero());
    expect_tensor_eq(lifted, nu_term * Rational(-1));
  }
}

TEST(Params15To14, RederivedBySolving) {
  Rng rng(36);
  const int m = 3;
  const int n = 2;
  // Columns: phi14 basis evaluations; right-hand sides: chi~ of each phi15 basis member.
  std::vector<std::vector<Rational>> basis14(Params14::kSize);
  std::vector<std::vector<Rational>> image15(Params15::kSize);
  for (int draw = 0; draw < 3; ++draw) {
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    const auto pt = random_point(rng, Space::jet(m, n).num_vars());
    for (int k = 0; k < Params14::kSize; ++k) {
      const auto v = evaluate(phi14(L, K, Params14::unit(k)), pt);
      basis14[k].insert(basis14[k].end(), v.begin(), v.end());
    }
    for (int k = 0; k < Params15::kSize; ++k) {
      const auto v = evaluate(chi_tilde(phi15(L, K, Params15::unit(k))), pt);
      image15[k].insert(image15[k].end(), v.begin(), v.end());
    }
  }
  const RationalMatrix B = RationalMatrix::from_rows(basis14).transposed();
  ASSERT_EQ(rank(B), Params14::kSize);
  const auto& frozen = params15_to_14_matrix();
  for (int k = 0; k < Params15::kSize; ++k) {
    const auto col = solve(B, image15[k]);
    for (int r = 0; r < Params14::kSize; ++r) EXPECT_EQ(col[r], frozen(r, k)) << "row " << r << " col " << k;
  }
}

TEST(Params15To14, IntertwinesAndIsLinear) {
  Rng rng(37);
  for (int t = 0; t < 5; ++t) {
    const auto L = random_classical_connection(rng, 2, 2, 3, false);
    const auto K = random_linear_connection(rng, 2, 2, 3);
    const auto p = random_p15(rng);
    expect_tensor_eq(chi(induce_D_tilde(L, K, p)).coeffs, induce_Gamma_tilde(L, K, params15_to_14(p)).coeffs);
  }
  EXPECT_EQ(params15_to_14(Params15{}), Params14{});
  const auto p = random_p15(rng);
  const auto q = random_p15(rng);
  std::vector<Rational> s;
  for (int k = 0; k < Params15::kSize; ++k) s.push_back(p.values()[k] + q.values()[k]);
  std::vector<Rational> img;
  for (int k = 0; k < Params14::kSize; ++k) img.push_back(params15_to_14(p).values()[k] + params15_to_14(q).values()[k]);
  EXPECT_EQ(params15_to_14(Params15::from_values(s)), Params14::from_values(img));
}

TEST(Params15To14, KernelIsTheA3H2Direction) {
  const auto ker = nullspace(params15_to_14_matrix());
  ASSERT_EQ(ker.size(), 1u);
  const auto names = Params15::names();
  for (int k = 0; k < Params15::kSize; ++k) {
    const std::string name = names[k];
    if (name == "a3" || name == "h2") {
      EXPECT_NE(ker[0][k], 0);
    } else {
      EXPECT_EQ(ker[0][k], 0);
    }
  }
  // Moving along the kernel leaves Gamma~ unchanged.
  Rng rng(38);
  const auto L = random_classical_connection(rng, 2, 2, 3, false);
  const auto K = random_linear_connection(rng, 2, 2, 3);
  auto p = random_p15(rng);
  auto p2 = p;
  p2.a3 += 2;
  p2.h2 += 2;
  EXPECT_EQ(params15_to_14(p), params15_to_14(p2));
  expect_tensor_eq(chi(induce_D_tilde(L, K, p)).coeffs, chi(induce_D_tilde(L, K, p2)).coeffs);
}

TEST(InduceGammaTilde, ZeroParamsAndAffineness) {
  Rng rng(39);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    const auto G = induce_Gamma_tilde(L, K, random_p14(rng));
    const Space J = Space::jet(m, n);
    for (std::size_t c = 0; c < G.coeffs.size(); ++c)
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < m; ++l)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < m; ++k)
              EXPECT_TRUE(partial(partial(G.coeffs.flat(c), J.ylam_var(i, l)), J.ylam_var(j, k)).is_zero());
    if (t == 0) expect_tensor_eq(induce_Gamma_tilde(L, K, Params14{}).coeffs, induce_Gamma(L, K).coeffs);
  }
}

TEST(Phi14, SpecialCases) {
  Rng rng(40);
  const auto Ls = random_classical_connection(rng, 2, 2, 3, true);
  auto p = random_p14(rng);
  p.d1 = p.d2 = p.e1 = p.e2 = 0;
  EXPECT_TRUE(phi14(Ls, GeneralLinearConnection(2, 2, 3), p).is_zero());
  EXPECT_THROW(phi14(Ls, GeneralLinearConnection(2, 2, 1), p), OrderError);
}
