#include "bundleconn/equivariance.hpp"

#include <algorithm>
#include <sstream>

#include "bundleconn/error.hpp"

namespace bundleconn {

// ------------------------------------------------------------ morphisms

MorphismJet::MorphismJet(std::vector<JetPoly> f, JetMatrix a)
    : m(static_cast<int>(f.size())), n(a.rows()), base(std::move(f)), fiber(std::move(a)) {
  if (fiber.rows() != fiber.cols()) throw InputError("morphism fiber part must be square");
  for (const auto& p : base) {
    if (p.num_vars() != m) throw InputError("morphism base jets must live in m variables");
    if (p.constant_term() != 0) throw InputError("morphism base jets must be centered");
  }
}

MorphismJet MorphismJet::identity(int m, int n, int order) {
  return MorphismJet(identity_jet(m, order), JetMatrix::identity(n, m, order));
}

int MorphismJet::order() const {
  int o = fiber.order();
  for (const auto& p : base) o = std::min(o, p.order());
  return o;
}

namespace {

RationalMatrix linear_part(const std::vector<JetPoly>& f, int m) {
  RationalMatrix b(m, m);
  for (int l = 0; l < m; ++l)
    for (int mu = 0; mu < m; ++mu) b(l, mu) = f[static_cast<std::size_t>(l)].coefficient(MultiIndex::unit(m, mu));
  return b;
}

RationalMatrix constant_part(const JetMatrix& a) {
  RationalMatrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j).constant_term();
  return c;
}

}  // namespace

void MorphismJet::validate() const {
  if (determinant(linear_part(base, m)) == 0) throw SingularError("morphism base jet has singular linear part");
  if (determinant(constant_part(fiber)) == 0) throw SingularError("morphism fiber part is singular at the center");
}

MorphismJet compose(const MorphismJet& outer, const MorphismJet& inner) {
  if (outer.m != inner.m || outer.n != inner.n) throw InputError("compose: morphism dimensions differ");
  auto f = compose_all(outer.base, inner.base);
  JetMatrix a = compose(outer.fiber, inner.base) * inner.fiber;
  return MorphismJet(std::move(f), std::move(a));
}

MorphismJet random_morphism(Rng& rng, int m, int n, int order) {
  while (true) {
    std::vector<JetPoly> f;
    for (int l = 0; l < m; ++l) f.push_back(rng.poly(m, order, 2, 1));
    JetMatrix a(n, n, m, order);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.poly(m, order, 2);
    MorphismJet phi(std::move(f), std::move(a));
    try {
      phi.validate();
      return phi;
    } catch (const SingularError&) {
    }
  }
}

// --------------------------------------------------------- group (1,1)

GroupElement11::GroupElement11(RationalMatrix a_, std::vector<Rational> a1_, RationalMatrix b_)
    : a(std::move(a_)), a1(std::move(a1_)), b(std::move(b_)) {
  const int n_ = a.rows();
  const int m_ = b.rows();
  if (static_cast<int>(a1.size()) != n_ * n_ * m_) throw InputError("group element derivative has wrong size");
  a_inv = inverse(a);
  b_inv = inverse(b);
  // d/dx'_m [a(g(x'))^-1] at 0 = -a^-1 (a_r b^-1^r_m) a^-1.
  a1_inv.assign(static_cast<std::size_t>(n_ * n_ * m_), 0);
  for (int mu = 0; mu < m_; ++mu) {
    RationalMatrix dm(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int r = 0; r < m_; ++r) dm(i, j) += da(i, j, r) * b_inv(r, mu);
    const RationalMatrix v = a_inv * dm * a_inv;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) a1_inv[static_cast<std::size_t>((i * n_ + j) * m_ + mu)] = -v(i, j);
  }
}

GroupElement11 GroupElement11::identity(int m, int n) {
  return GroupElement11(RationalMatrix::identity(n), std::vector<Rational>(static_cast<std::size_t>(n * n * m)),
                        RationalMatrix::identity(m));
}

GroupElement11 GroupElement11::from_morphism(const MorphismJet& phi) {
  const int m = phi.m;
  const int n = phi.n;
  std::vector<Rational> a1(static_cast<std::size_t>(n * n * m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < m; ++l)
        a1[static_cast<std::size_t>((i * n + j) * m + l)] = phi.fiber(i, j).coefficient(MultiIndex::unit(m, l));
  return GroupElement11(constant_part(phi.fiber), std::move(a1), linear_part(phi.base, m));
}

GroupElement11 compose(const GroupElement11& outer, const GroupElement11& inner) {
  const int m = inner.m();
  const int n = inner.n();
  std::vector<Rational> a1(static_cast<std::size_t>(n * n * m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < m; ++l) {
        Rational v = 0;
        for (int p = 0; p < n; ++p) {
          for (int r = 0; r < m; ++r) v += outer.da(i, p, r) * inner.b(r, l) * inner.a(p, j);
          v += outer.a(i, p) * inner.da(p, j, l);
        }
        a1[static_cast<std::size_t>((i * n + j) * m + l)] = v;
      }
  return GroupElement11(outer.a * inner.a, std::move(a1), outer.b * inner.b);
}

Phi3 action_2_1_to_2_8(const GroupElement11& g, const Phi3& phi, const std::vector<Rational>& y) {
  const int m = g.m();
  const int n = g.n();
  const int N = m + n;
  if (static_cast<int>(phi.size()) != N * N * N) throw InputError("action: tensor value has wrong size");
  if (static_cast<int>(y.size()) != n) throw InputError("action: fiber point has wrong size");
  auto P = [&](int B, int A, int C) -> const Rational& { return phi[static_cast<std::size_t>((B * N + A) * N + C)]; };
  auto F = [&](int s) { return m + s; };  // fiber index -> total index

  // Z^i_r = a^i_{pr} y^p and Y^s_m = at^s_{pm} a^p_q y^q.
  std::vector<Rational> Z(static_cast<std::size_t>(n * m)), Y(static_cast<std::size_t>(n * m));
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < m; ++r)
      for (int p = 0; p < n; ++p) {
        Z[static_cast<std::size_t>(i * m + r)] += g.da(i, p, r) * y[static_cast<std::size_t>(p)];
        for (int q = 0; q < n; ++q)
          Y[static_cast<std::size_t>(i * m + r)] += g.da_inv(i, p, r) * g.a(p, q) * y[static_cast<std::size_t>(q)];
      }
  auto z = [&](int i, int r) -> const Rational& { return Z[static_cast<std::size_t>(i * m + r)]; };
  auto Yv = [&](int s, int mu) -> const Rational& { return Y[static_cast<std::size_t>(s * m + mu)]; };
  const auto& a = g.a;
  const auto& at = g.a_inv;
  const auto& b = g.b;
  const auto& bt = g.b_inv;

  Phi3 out(phi.size());
  auto O = [&](int B, int A, int C) -> Rational& { return out[static_cast<std::size_t>((B * N + A) * N + C)]; };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {  // Phi_j^i_k
        Rational v = 0;
        for (int s = 0; s < n; ++s)
          for (int t = 0; t < n; ++t) {
            for (int r = 0; r < n; ++r) v += a(i, r) * P(F(s), F(r), F(t)) * at(s, j) * at(t, k);
            for (int rho = 0; rho < m; ++rho) v += z(i, rho) * P(F(s), rho, F(t)) * at(s, j) * at(t, k);
          }
        O(F(j), F(i), F(k)) = v;
      }
      for (int nu = 0; nu < m; ++nu) {  // Phi_j^i_n
        Rational v = 0;
        for (int s = 0; s < n; ++s) {
          for (int r = 0; r < n; ++r) {
            for (int tau = 0; tau < m; ++tau) v += a(i, r) * P(F(s), F(r), tau) * at(s, j) * bt(tau, nu);
            for (int t = 0; t < n; ++t) v += a(i, r) * P(F(s), F(r), F(t)) * at(s, j) * Yv(t, nu);
          }
          for (int rho = 0; rho < m; ++rho) {
            for (int t = 0; t < n; ++t) v += z(i, rho) * P(F(s), rho, F(t)) * at(s, j) * Yv(t, nu);
            for (int tau = 0; tau < m; ++tau) v += z(i, rho) * P(F(s), rho, tau) * at(s, j) * bt(tau, nu);
          }
        }
        O(F(j), F(i), nu) = v;
      }
    }
    for (int mu = 0; mu < m; ++mu) {
      for (int k = 0; k < n; ++k) {  // Phi_m^i_k
        Rational v = 0;
        for (int t = 0; t < n; ++t) {
          for (int r = 0; r < n; ++r) {
            for (int sg = 0; sg < m; ++sg) v += a(i, r) * P(sg, F(r), F(t)) * bt(sg, mu) * at(t, k);
            for (int s = 0; s < n; ++s) v += a(i, r) * P(F(s), F(r), F(t)) * Yv(s, mu) * at(t, k);
          }
          for (int rho = 0; rho < m; ++rho) {
            for (int s = 0; s < n; ++s) v += z(i, rho) * P(F(s), rho, F(t)) * Yv(s, mu) * at(t, k);
            for (int sg = 0; sg < m; ++sg) v += z(i, rho) * P(sg, rho, F(t)) * bt(sg, mu) * at(t, k);
          }
        }
        O(mu, F(i), F(k)) = v;
      }
      for (int nu = 0; nu < m; ++nu) {  // Phi_m^i_n
        Rational v = 0;
        for (int r = 0; r < n; ++r) {
          for (int sg = 0; sg < m; ++sg)
            for (int tau = 0; tau < m; ++tau) v += a(i, r) * P(sg, F(r), tau) * bt(sg, mu) * bt(tau, nu);
          for (int s = 0; s < n; ++s)
            for (int tau = 0; tau < m; ++tau) v += a(i, r) * P(F(s), F(r), tau) * Yv(s, mu) * bt(tau, nu);
          for (int sg = 0; sg < m; ++sg)
            for (int t = 0; t < n; ++t) v += a(i, r) * P(sg, F(r), F(t)) * bt(sg, mu) * Yv(t, nu);
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) v += a(i, r) * P(F(s), F(r), F(t)) * Yv(s, mu) * Yv(t, nu);
        }
        for (int rho = 0; rho < m; ++rho) {
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) v += z(i, rho) * P(F(s), rho, F(t)) * Yv(s, mu) * Yv(t, nu);
          for (int sg = 0; sg < m; ++sg)
            for (int t = 0; t < n; ++t) v += z(i, rho) * P(sg, rho, F(t)) * bt(sg, mu) * Yv(t, nu);
          for (int s = 0; s < n; ++s)
            for (int tau = 0; tau < m; ++tau) v += z(i, rho) * P(F(s), rho, tau) * Yv(s, mu) * bt(tau, nu);
          for (int sg = 0; sg < m; ++sg)
            for (int tau = 0; tau < m; ++tau) v += z(i, rho) * P(sg, rho, tau) * bt(sg, mu) * bt(tau, nu);
        }
        O(mu, F(i), nu) = v;
      }
    }
  }
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {  // Phi_j^l_k
        Rational v = 0;
        for (int rho = 0; rho < m; ++rho)
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) v += b(l, rho) * P(F(s), rho, F(t)) * at(s, j) * at(t, k);
        O(F(j), l, F(k)) = v;
      }
      for (int nu = 0; nu < m; ++nu) {  // Phi_j^l_n
        Rational v = 0;
        for (int rho = 0; rho < m; ++rho)
          for (int s = 0; s < n; ++s) {
            for (int tau = 0; tau < m; ++tau) v += b(l, rho) * P(F(s), rho, tau) * at(s, j) * bt(tau, nu);
            for (int t = 0; t < n; ++t) v += b(l, rho) * P(F(s), rho, F(t)) * at(s, j) * Yv(t, nu);
          }
        O(F(j), l, nu) = v;
      }
    }
    for (int mu = 0; mu < m; ++mu) {
      for (int k = 0; k < n; ++k) {  // Phi_m^l_k
        Rational v = 0;
        for (int rho = 0; rho < m; ++rho)
          for (int t = 0; t < n; ++t) {
            for (int sg = 0; sg < m; ++sg) v += b(l, rho) * P(sg, rho, F(t)) * bt(sg, mu) * at(t, k);
            for (int s = 0; s < n; ++s) v += b(l, rho) * P(F(s), rho, F(t)) * Yv(s, mu) * at(t, k);
          }
        O(mu, l, F(k)) = v;
      }
      for (int nu = 0; nu < m; ++nu) {  // Phi_m^l_n
        Rational v = 0;
        for (int rho = 0; rho < m; ++rho) {
          for (int sg = 0; sg < m; ++sg)
            for (int tau = 0; tau < m; ++tau) v += b(l, rho) * P(sg, rho, tau) * bt(sg, mu) * bt(tau, nu);
          for (int s = 0; s < n; ++s)
            for (int tau = 0; tau < m; ++tau) v += b(l, rho) * P(F(s), rho, tau) * Yv(s, mu) * bt(tau, nu);
          for (int sg = 0; sg < m; ++sg)
            for (int t = 0; t < n; ++t) v += b(l, rho) * P(sg, rho, F(t)) * bt(sg, mu) * Yv(t, nu);
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) v += b(l, rho) * P(F(s), rho, F(t)) * Yv(s, mu) * Yv(t, nu);
        }
        O(mu, l, nu) = v;
      }
    }
  }
  return out;
}

JetFiberPoint action_J1E(const GroupElement11& g, const JetFiberPoint& p) {
  const int m = g.m();
  const int n = g.n();
  if (static_cast<int>(p.y.size()) != n || static_cast<int>(p.ylam.size()) != n * m) {
    throw InputError("action_J1E: jet point has wrong size");
  }
  JetFiberPoint out{std::vector<Rational>(static_cast<std::size_t>(n)),
                    std::vector<Rational>(static_cast<std::size_t>(n * m))};
  for (int i = 0; i < n; ++i) {
    for (int q = 0; q < n; ++q) out.y[static_cast<std::size_t>(i)] += g.a(i, q) * p.y[static_cast<std::size_t>(q)];
    for (int l = 0; l < m; ++l) {
      Rational v = 0;
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < m; ++r) {
          v += g.a(i, q) * p.ylam[static_cast<std::size_t>(q * m + r)] * g.b_inv(r, l);
          v += g.da(i, q, r) * p.y[static_cast<std::size_t>(q)] * g.b_inv(r, l);
        }
      out.ylam[static_cast<std::size_t>(i * m + l)] = v;
    }
  }
  return out;
}

// ---------------------------------------------------- coordinate frames

namespace {

JetMatrix embed(const JetMatrix& a, int num_vars) {
  JetMatrix r = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).embedded(num_vars);
  return r;
}

JetMatrix transpose(const JetMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return a;
  JetMatrix t(a.cols(), a.rows(), a(0, 0).num_vars(), a.order());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Everything derived from one morphism, in the new coordinates.
struct Frames {
  int m, n;
  std::vector<JetPoly> g;  // inverse base map, m vars
  JetMatrix J_src;         // df/dx in old coordinates
  JetMatrix J_src_inv;
  JetMatrix Jg, Pm;        // J o g and its inverse
  JetMatrix Ag, Ag_inv;    // a o g and its inverse
  std::vector<JetMatrix> dAg;  // (d_r a) o g

  // On E (m + n vars).
  std::vector<JetPoly> psiE;
  JetMatrix GE, PE;

  // On J1E.
  std::vector<JetPoly> psi1;
};

enum class FrameLevel { Base, E, J1E };

Frames make_frames(const MorphismJet& phi, FrameLevel level) {
  phi.validate();
  Frames F;
  const int m = phi.m;
  const int n = phi.n;
  F.m = m;
  F.n = n;
  const int o = phi.order();
  F.g = invert_jet(phi.base);
  F.J_src = JetMatrix(m, m, m, o - 1);
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r) F.J_src(l, r) = partial(phi.base[static_cast<std::size_t>(l)], r);
  F.J_src_inv = inverse(F.J_src);
  F.Jg = compose(F.J_src, F.g);
  F.Pm = inverse(F.Jg);
  F.Ag = compose(phi.fiber, F.g);
  F.Ag_inv = inverse(F.Ag);
  for (int r = 0; r < m; ++r) F.dAg.push_back(compose(partial(phi.fiber, r), F.g));
  if (level == FrameLevel::Base) return F;

  const Space E = Space::total(m, n);
  const int nvE = E.num_vars();
  const JetMatrix AgiE = embed(F.Ag_inv, nvE);
  std::vector<JetPoly> yE;  // old y as jets in (x', y')
  for (int i = 0; i < n; ++i) {
    JetPoly yi(nvE, o);
    for (int j = 0; j < n; ++j) yi += AgiE(i, j) * JetPoly::variable(nvE, o, E.y_var(j));
    yE.push_back(std::move(yi));
  }
  for (int l = 0; l < m; ++l) F.psiE.push_back(F.g[static_cast<std::size_t>(l)].embedded(nvE));
  for (int i = 0; i < n; ++i) F.psiE.push_back(yE[static_cast<std::size_t>(i)]);

  // GE = [[J, 0], [d_r a y, a]] along psiE; PE by block inversion.
  const int oE = o - 1;
  F.GE = JetMatrix(m + n, m + n, nvE, oE);
  JetMatrix C(n, m, nvE, oE);
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r) F.GE(l, r) = F.Jg(l, r).embedded(nvE).truncated(oE);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < m; ++r) {
      JetPoly c(nvE, oE);
      for (int p = 0; p < n; ++p) c += F.dAg[static_cast<std::size_t>(r)](i, p).embedded(nvE) * yE[static_cast<std::size_t>(p)];
      C(i, r) = c.truncated(oE);
      F.GE(m + i, r) = C(i, r);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F.GE(m + i, m + j) = F.Ag(i, j).embedded(nvE).truncated(oE);
  const JetMatrix PmE = embed(F.Pm, nvE);
  const JetMatrix lower = JetMatrix(n, m, nvE, oE) - AgiE * C * PmE;
  F.PE = JetMatrix(m + n, m + n, nvE, oE);
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r) F.PE(l, r) = PmE(l, r).truncated(oE);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < m; ++r) F.PE(m + i, r) = lower(i, r);
    for (int j = 0; j < n; ++j) F.PE(m + i, m + j) = AgiE(i, j).truncated(oE);
  }

  if (level == FrameLevel::E) return F;

  // psi1: x = g(x'), y = a~ y', y_r = a~ (y'_l J^l_r - (d_r a) y).
  const Space J1 = Space::jet(m, n);
  const int nv1 = J1.num_vars();
  const JetMatrix Agi1 = embed(F.Ag_inv, nv1);
  const JetMatrix Jg1 = embed(F.Jg, nv1);
  std::vector<JetPoly> y1;
  for (int i = 0; i < n; ++i) y1.push_back(yE[static_cast<std::size_t>(i)].embedded(nv1));
  for (int l = 0; l < m; ++l) F.psi1.push_back(F.g[static_cast<std::size_t>(l)].embedded(nv1));
  for (int i = 0; i < n; ++i) F.psi1.push_back(y1[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < m; ++r) {
      JetPoly v(nv1, oE);
      for (int j = 0; j < n; ++j) {
        JetPoly inner(nv1, oE);
        for (int l = 0; l < m; ++l) inner += JetPoly::variable(nv1, oE, J1.ylam_var(j, l)) * Jg1(l, r);
        for (int p = 0; p < n; ++p)
          inner -= F.dAg[static_cast<std::size_t>(r)](j, p).embedded(nv1) * y1[static_cast<std::size_t>(p)];
        v += Agi1(i, j) * inner;
      }
      F.psi1.push_back(std::move(v));
    }
  return F;
}

FrameLevel frame_level(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::M:
      return FrameLevel::Base;
    case SpaceKind::E:
      return FrameLevel::E;
    case SpaceKind::J1E:
      break;
  }
  return FrameLevel::J1E;
}

// w'_C' = sum_C P(C, C') G (w_C o psi) G^-1 + (d_C' G) G^-1.
std::vector<JetMatrix> transform_matrices(const std::vector<JetMatrix>& w, std::span<const JetPoly> psi,
                                          const JetMatrix& G, const JetMatrix& Ginv, const JetMatrix& P) {
  std::vector<JetMatrix> composed;
  for (const auto& wc : w) composed.push_back(G * compose(wc, psi) * Ginv);
  std::vector<JetMatrix> out;
  for (int cb = 0; cb < static_cast<int>(w.size()); ++cb) {
    JetMatrix acc = partial(G, cb) * Ginv;
    for (int c = 0; c < static_cast<int>(w.size()); ++c) {
      const JetPoly& pc = P(c, cb);
      if (pc.is_zero()) continue;
      JetMatrix term = composed[static_cast<std::size_t>(c)];
      for (int i = 0; i < term.rows(); ++i)
        for (int j = 0; j < term.cols(); ++j) term(i, j) = term(i, j) * pc;
      acc = acc + term;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace

namespace {

GeneralLinearConnection transform_linear_in(const GeneralLinearConnection& K, const MorphismJet& phi, const Frames& F) {
  if (K.m() != phi.m || K.n() != phi.n) throw InputError("transform_linear: dimension mismatch");
  const int m = K.m();
  const int n = K.n();
  std::vector<JetMatrix> w;
  for (int l = 0; l < m; ++l) {
    JetMatrix k(n, n, m, K.order());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = K.k(i, j, l);
    w.push_back(std::move(k));
  }
  const auto out = transform_matrices(w, F.g, F.Ag, F.Ag_inv, F.Pm);
  GeneralLinearConnection R(m, n, 0);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R.k(i, j, l) = out[static_cast<std::size_t>(l)](i, j);
  return R;
}

}  // namespace

GeneralLinearConnection transform_linear(const GeneralLinearConnection& K, const MorphismJet& phi) {
  return transform_linear_in(K, phi, make_frames(phi, FrameLevel::Base));
}

namespace {

ClassicalConnection transform_classical_in(const ClassicalConnection& L, const MorphismJet& phi, const Frames& F) {
  if (L.m() != phi.m || L.n() != phi.n) throw InputError("transform_classical: dimension mismatch");
  const int m = L.m();
  std::vector<JetMatrix> w;
  for (int nu = 0; nu < m; ++nu) {
    JetMatrix k(m, m, m, L.order());
    for (int l = 0; l < m; ++l)
      for (int r = 0; r < m; ++r) k(l, r) = L.l(l, r, nu);
    w.push_back(std::move(k));
  }
  const auto out = transform_matrices(w, F.g, F.Jg, F.Pm, F.Pm);
  ClassicalConnection R(m, L.n(), 0);
  for (int nu = 0; nu < m; ++nu)
    for (int l = 0; l < m; ++l)
      for (int r = 0; r < m; ++r) R.l(l, r, nu) = out[static_cast<std::size_t>(nu)](l, r);
  R.symmetric = L.symmetric;
  return R;
}

}  // namespace

ClassicalConnection transform_classical(const ClassicalConnection& L, const MorphismJet& phi) {
  return transform_classical_in(L, phi, make_frames(phi, FrameLevel::Base));
}

namespace {

ClassicalConnectionOnE transform_connection_E_in(const ClassicalConnectionOnE& D, const MorphismJet& phi, const Frames& F) {
  if (D.m() != phi.m || D.n() != phi.n) throw InputError("transform_connection_E: dimension mismatch");
  const int N = D.m() + D.n();
  const int nv = Space::total(D.m(), D.n()).num_vars();
  std::vector<JetMatrix> w;
  for (int c = 0; c < N; ++c) {
    JetMatrix k(N, N, nv, D.order());
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) k(a, b) = D.d(b, a, c);
    w.push_back(std::move(k));
  }
  const auto out = transform_matrices(w, F.psiE, F.GE, F.PE, F.PE);
  ClassicalConnectionOnE R(D.m(), D.n(), 0);
  for (int c = 0; c < N; ++c)
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) R.d(b, a, c) = out[static_cast<std::size_t>(c)](a, b);
  return R;
}

}  // namespace

ClassicalConnectionOnE transform_connection_E(const ClassicalConnectionOnE& D, const MorphismJet& phi) {
  return transform_connection_E_in(D, phi, make_frames(phi, FrameLevel::E));
}

namespace {

ConnectionOnJ1E transform_connection_J1E_in(const ConnectionOnJ1E& G, const MorphismJet& phi, const Frames& F) {
  if (G.m() != phi.m || G.n() != phi.n) throw InputError("transform_connection_J1E: dimension mismatch");
  const int m = G.m();
  const int n = G.n();
  const Space J1 = Space::jet(m, n);
  const int nv = J1.num_vars();
  const int o = phi.order() - 1;

  // Forward jet coordinates w'^i_l = (a^i_p y^p_r + d_r a^i_p y^p) (J^-1)^r_l in old coordinates.
  std::vector<JetPoly> wbar;
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < m; ++l) {
      JetPoly v(nv, o);
      for (int r = 0; r < m; ++r) {
        JetPoly inner(nv, o);
        for (int p = 0; p < n; ++p) {
          inner += phi.fiber(i, p).embedded(nv) * JetPoly::variable(nv, o, J1.ylam_var(p, r));
          inner += partial(phi.fiber(i, p), r).embedded(nv) * JetPoly::variable(nv, o, J1.y_var(p));
        }
        v += inner * F.J_src_inv(r, l).embedded(nv);
      }
      wbar.push_back(std::move(v));
    }

  // H^b_A = d_A w'^b + d_alpha w'^b Gamma^alpha_A, then pulled back along psi1.
  const int N = m + n;
  std::vector<JetPoly> H;
  for (int b = 0; b < n * m; ++b)
    for (int A = 0; A < N; ++A) {
      JetPoly h = partial(wbar[static_cast<std::size_t>(b)], A);
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < m; ++r) {
          const JetPoly dw = partial(wbar[static_cast<std::size_t>(b)], J1.ylam_var(q, r));
          if (dw.is_zero()) continue;
          h += dw * G.g(A, q, r);
        }
      H.push_back(std::move(h));
    }
  const auto Hc = compose_all(H, F.psi1);
  const JetMatrix PE1 = embed(F.PE, nv);
  ConnectionOnJ1E R(m, n, 0);
  for (int B = 0; B < N; ++B)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < m; ++l) {
        const int b = i * m + l;
        JetPoly v(nv, o);
        for (int A = 0; A < N; ++A) {
          if (PE1(A, B).is_zero()) continue;
          v += PE1(A, B) * Hc[static_cast<std::size_t>(b * N + A)];
        }
        R.g(B, i, l) = std::move(v);
      }
  return R;
}

}  // namespace

ConnectionOnJ1E transform_connection_J1E(const ConnectionOnJ1E& G, const MorphismJet& phi) {
  return transform_connection_J1E_in(G, phi, make_frames(phi, FrameLevel::J1E));
}

namespace {

TensorField transform_tensor_in(const TensorField& t, const MorphismJet& phi, const Frames& F) {
  if (t.space().m != phi.m || t.space().n != phi.n) throw InputError("transform_tensor: dimension mismatch");
  const Space s = t.space();
  const int nv = s.num_vars();
  std::span<const JetPoly> psi;
  switch (s.kind) {
    case SpaceKind::M:
      psi = F.g;
      break;
    case SpaceKind::E:
      psi = F.psiE;
      break;
    case SpaceKind::J1E:
      psi = F.psi1;
      break;
  }
  TensorField out = compose(t, psi, s);
  for (int slot = 0; slot < t.rank(); ++slot) {
    const SlotKind k = t.signature()[static_cast<std::size_t>(slot)];
    JetMatrix M;
    switch (k) {
      case SlotKind::BaseUp:
        M = embed(F.Jg, nv);
        break;
      case SlotKind::BaseDown:
        M = transpose(embed(F.Pm, nv));
        break;
      case SlotKind::FiberUp:
        M = embed(F.Ag, nv);
        break;
      case SlotKind::FiberDown:
        M = transpose(embed(F.Ag_inv, nv));
        break;
      case SlotKind::TotalUp:
      case SlotKind::TotalDown:
        if (s.kind == SpaceKind::M) throw InputError("transform_tensor: total slot on a tensor over M");
        M = k == SlotKind::TotalUp ? embed(F.GE, nv) : transpose(embed(F.PE, nv));
        break;
    }
    out = map_slot(out, slot, M, k);
  }
  return out;
}

}  // namespace

TensorField transform_tensor(const TensorField& t, const MorphismJet& phi) {
  return transform_tensor_in(t, phi, make_frames(phi, frame_level(t.space().kind)));
}

// ------------------------------------------------------------ naturality

Params15 random_params15(Rng& rng) {
  std::vector<Rational> v;
  for (int k = 0; k < Params15::kSize; ++k) v.push_back(rng.rational());
  return Params15::from_values(v);
}

Params14 random_params14(Rng& rng) {
  std::vector<Rational> v;
  for (int k = 0; k < Params14::kSize; ++k) v.push_back(rng.rational());
  return Params14::from_values(v);
}

const std::vector<std::string>& natural_operator_names() {
  static const std::vector<std::string> names{"induce_D",     "phi15", "induce_D_tilde",
                                              "induce_Gamma", "phi14", "induce_Gamma_tilde"};
  return names;
}

NaturalOperator named_operator(const std::string& name, const Params15& p15, const Params14& p14) {
  using L_t = const ClassicalConnection&;
  using K_t = const GeneralLinearConnection&;
  if (name == "induce_D") {
    return {name, ObjectKind::ConnectionE, [](L_t L, K_t K) { return induce_D(L, K).coeffs; }};
  }
  if (name == "phi15") return {name, ObjectKind::TensorE, [p15](L_t L, K_t K) { return phi15(L, K, p15); }};
  if (name == "induce_D_tilde") {
    return {name, ObjectKind::ConnectionE, [p15](L_t L, K_t K) { return induce_D_tilde(L, K, p15).coeffs; }};
  }
  if (name == "induce_Gamma") {
    return {name, ObjectKind::ConnectionJ1E, [](L_t L, K_t K) { return induce_Gamma(L, K).coeffs; }};
  }
  if (name == "phi14") return {name, ObjectKind::TensorJ1E, [p14](L_t L, K_t K) { return phi14(L, K, p14); }};
  if (name == "induce_Gamma_tilde") {
    return {name, ObjectKind::ConnectionJ1E,
            [p14](L_t L, K_t K) { return induce_Gamma_tilde(L, K, p14).coeffs; }};
  }
  throw InputError("unknown natural operator: " + name);
}

namespace {

TensorField transform_object(const TensorField& obj, ObjectKind kind, const MorphismJet& phi, const Frames& F) {
  switch (kind) {
    case ObjectKind::ConnectionE:
      return transform_connection_E_in(ClassicalConnectionOnE(obj), phi, F).coeffs;
    case ObjectKind::ConnectionJ1E:
      return transform_connection_J1E_in(ConnectionOnJ1E(obj), phi, F).coeffs;
    case ObjectKind::TensorE:
    case ObjectKind::TensorJ1E:
      return transform_tensor_in(obj, phi, F);
  }
  return obj;
}

FrameLevel frame_level(ObjectKind kind) {
  return kind == ObjectKind::ConnectionE || kind == ObjectKind::TensorE ? FrameLevel::E : FrameLevel::J1E;
}

}  // namespace

NaturalityReport verify_naturality(const std::string& name, int trials, std::uint64_t seed,
                                   const NaturalityConfig& cfg) {
  named_operator(name, Params15{}, Params14{});  // rejects unknown names before any work
  NaturalityReport report;
  report.suite = name;
  report.seed = seed;
  report.trials = trials;
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    const Params15 p15 = cfg.params15 ? *cfg.params15 : random_params15(rng);
    const Params14 p14 = cfg.params14 ? *cfg.params14 : random_params14(rng);
    NaturalityConfig one = cfg;
    one.params15 = p15;
    one.params14 = p14;
    const NaturalOperator op = named_operator(name, p15, p14);
    const auto sub = verify_naturality(op, 1, rng.engine()(), one);
    if (sub.ok()) {
      ++report.passes;
    } else {
      for (auto f : sub.failures) {
        f.trial = trial;
        report.failures.push_back(std::move(f));
      }
    }
  }
  return report;
}

NaturalityReport verify_naturality(const NaturalOperator& op, int trials, std::uint64_t seed,
                                   const NaturalityConfig& cfg) {
  NaturalityReport report;
  report.suite = op.name;
  report.seed = seed;
  report.trials = trials;
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    const auto L = cfg.lambda ? *cfg.lambda : random_classical_connection(rng, cfg.m, cfg.n, cfg.order, cfg.symmetric);
    const auto K = cfg.k ? *cfg.k : random_linear_connection(rng, cfg.m, cfg.n, cfg.order);
    const auto phi = random_morphism(rng, K.m(), K.n(), cfg.morphism_order);
    const Frames F = make_frames(phi, frame_level(op.kind));
    const TensorField lhs = transform_object(op.build(L, K), op.kind, phi, F);
    const TensorField rhs = op.build(transform_classical_in(L, phi, F), transform_linear_in(K, phi, F));
    const int order = std::min(lhs.order(), rhs.order());
    bool ok = lhs.signature() == rhs.signature() && lhs.size() == rhs.size();
    if (ok) {
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        const JetPoly a = lhs.flat(k).truncated(order);
        const JetPoly b = rhs.flat(k).truncated(order);
        if (!(a == b)) {
          report.failures.push_back({trial, k, lhs.unflatten(k), to_string(a), to_string(b)});
          ok = false;
          break;
        }
      }
    } else {
      report.failures.push_back({trial, 0, {}, "shape mismatch", "shape mismatch"});
    }
    if (ok) ++report.passes;
  }
  return report;
}

// ------------------------------------------------------------- counting

std::vector<WeightSolution> weight_solutions(int s, int r, int rhs) {
  if (s < 0 || r < 0) throw InputError("weight_solutions: s and r must be non-negative");
  if (rhs > 0) throw InputError("weight_solutions: right-hand side must be <= 0");
  std::vector<int> weights;
  for (int i = 0; i <= s; ++i) weights.push_back(i + 1);
  for (int j = 0; j < s; ++j) weights.push_back(j + 2);
  weights.push_back(1);
  for (int k = 0; k < r; ++k) weights.push_back(k + 2);
  std::vector<WeightSolution> out;
  std::vector<int> e(weights.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int remaining) {
    if (pos == weights.size()) {
      if (remaining != 0) return;
      WeightSolution w;
      std::size_t q = 0;
      for (int i = 0; i <= s; ++i) w.a.push_back(e[q++]);
      for (int j = 0; j < s; ++j) w.b.push_back(e[q++]);
      w.c = e[q++];
      for (int k = 0; k < r; ++k) w.d.push_back(e[q++]);
      out.push_back(std::move(w));
      return;
    }
    for (int v = 0; v * weights[pos] <= remaining; ++v) {
      e[pos] = v;
      rec(pos + 1, remaining - v * weights[pos]);
    }
    e[pos] = 0;
  };
  rec(0, -rhs);
  return out;
}

std::string to_string(const WeightSolution& w) {
  std::ostringstream os;
  bool first = true;
  auto put = [&](const std::string& name, int v) {
    if (v == 0) return;
    if (!first) os << ", ";
    first = false;
    os << name << '=' << v;
  };
  for (std::size_t i = 0; i < w.a.size(); ++i) put("a" + std::to_string(i), w.a[i]);
  for (std::size_t j = 0; j < w.b.size(); ++j) put("b" + std::to_string(j), w.b[j]);
  put("c", w.c);
  for (std::size_t k = 0; k < w.d.size(); ++k) put("d" + std::to_string(k), w.d[k]);
  return first ? "0" : os.str();
}

int family_rank(const std::vector<std::vector<Rational>>& basis) {
  if (basis.empty()) throw InputError("family_rank: empty basis");
  return rank(RationalMatrix::from_rows(basis));
}

RankResult family_rank(Family family, int m, int n, bool symmetric, Rng& rng, int order) {
  const int size = family == Family::Phi15 ? Params15::kSize : Params14::kSize;
  std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(size));
  RankResult result;
  // Full rank ends the search; otherwise the rank must hold over three draws.
  constexpr int kStable = 3;
  constexpr int kMaxDraws = 16;
  while (result.draws < kMaxDraws) {
    const auto L = random_classical_connection(rng, m, n, order, symmetric);
    const auto K = random_linear_connection(rng, m, n, order);
    const Ingredients ing = ingredients(L, K);
    // Base point at the origin keeps every truncated jet exact; the fiber and
    // jet coordinates are random.
    const Space s = family == Family::Phi15 ? Space::total(m, n) : Space::jet(m, n);
    std::vector<Rational> point(static_cast<std::size_t>(s.num_vars()));
    for (int v = m; v < s.num_vars(); ++v) point[static_cast<std::size_t>(v)] = rng.rational();
    for (int k = 0; k < size; ++k) {
      const TensorField t = family == Family::Phi15
                                ? phi15_from_terms(ing, K, natural_terms(Params15::unit(k)))
                                : phi14_from_terms(ing, K, natural_terms(Params14::unit(k)));
      const auto values = evaluate(t, point);
      auto& row = rows[static_cast<std::size_t>(k)];
      row.insert(row.end(), values.begin(), values.end());
    }
    ++result.draws;
    result.rank_by_draw.push_back(family_rank(rows));
    const auto& r = result.rank_by_draw;
    if (r.back() == size) break;
    if (result.draws >= kStable && std::all_of(r.end() - kStable, r.end(), [&](int x) { return x == r.back(); })) break;
  }
  result.rank = result.rank_by_draw.back();
  return result;
}

}  // namespace bundleconn
