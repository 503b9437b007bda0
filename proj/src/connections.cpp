#include "bundleconn/connections.hpp"

#include <algorithm>

#include "bundleconn/error.hpp"

namespace bundleconn {

namespace {

const Signature kSigK{SlotKind::FiberUp, SlotKind::FiberDown, SlotKind::BaseDown};
const Signature kSigL{SlotKind::BaseUp, SlotKind::BaseDown, SlotKind::BaseDown};

void check_pair(const GeneralLinearConnection& K, const ClassicalConnection& L) {
  if (K.m() != L.m()) throw InputError("base dimension of K and L differ");
}

// Coefficient of Phi[..b..] in C_v Phi[..a..] for one slot of the given kind.
JetPoly slot_coefficient(SlotKind kind, int a, int b, int v, const GeneralLinearConnection& K,
                         const ClassicalConnection& L) {
  switch (kind) {
    case SlotKind::FiberUp:
      return K.k(a, b, v);
    case SlotKind::FiberDown:
      return -K.k(b, a, v);
    case SlotKind::BaseUp:
      return L.l(a, b, v);
    case SlotKind::BaseDown:
      return -L.l(b, a, v);
    default:
      throw InputError("covariant differential: total slots are not sections over M");
  }
}

}  // namespace

GeneralLinearConnection::GeneralLinearConnection(int m, int n, int order)
    : coeffs(Space::base(m, n), kSigK, order) {}

GeneralLinearConnection::GeneralLinearConnection(TensorField c) : coeffs(std::move(c)) {
  if (coeffs.space().kind != SpaceKind::M || coeffs.signature() != kSigK) {
    throw InputError("linear connection coefficients must be an (i, j, l) table over M");
  }
}

ClassicalConnection::ClassicalConnection(int m, int n, int order) : coeffs(Space::base(m, n), kSigL, order) {}

ClassicalConnection::ClassicalConnection(TensorField c, bool symmetric_claim)
    : coeffs(std::move(c)), symmetric(symmetric_claim) {
  if (coeffs.space().kind != SpaceKind::M || coeffs.signature() != kSigL) {
    throw InputError("classical connection coefficients must be an (l, m, n) table over M");
  }
}

bool ClassicalConnection::is_symmetric() const {
  for (int a = 0; a < m(); ++a)
    for (int b = 0; b < m(); ++b)
      for (int c = b + 1; c < m(); ++c)
        if (!(l(a, b, c) == l(a, c, b))) return false;
  return true;
}

void ClassicalConnection::validate() const {
  if (symmetric && !is_symmetric()) throw InputError("classical connection flagged symmetric is not symmetric");
}

TorsionSplit torsion_split(const ClassicalConnection& L) {
  const int m = L.m();
  TorsionSplit out{ClassicalConnection(m, L.n(), L.order()),
                   TensorField(L.coeffs.space(), {SlotKind::BaseDown, SlotKind::BaseUp, SlotKind::BaseDown},
                               L.order())};
  const Rational half(1, 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        out.sym.l(a, b, c) = (L.l(a, b, c) + L.l(a, c, b)) * half;
        out.torsion.at({b, a, c}) = (L.l(a, b, c) - L.l(a, c, b)) * half;
      }
  out.sym.symmetric = true;
  return out;
}

TensorField torsion_trace(const TensorField& torsion) { return contract(torsion, 1, 0); }

TensorField curvature_K(const GeneralLinearConnection& K) {
  if (K.order() < 1) throw OrderError("curvature_K: coefficients need order >= 1");
  const int m = K.m();
  const int n = K.n();
  const int order = K.order() - 1;
  TensorField R(K.coeffs.space(), {SlotKind::FiberDown, SlotKind::FiberUp, SlotKind::BaseDown, SlotKind::BaseDown},
                order);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
          JetPoly v = partial(K.k(i, j, mu), nu) - partial(K.k(i, j, nu), mu);
          for (int r = 0; r < n; ++r) {
            v += K.k(i, r, mu) * K.k(r, j, nu);
            v -= K.k(i, r, nu) * K.k(r, j, mu);
          }
          R.at({j, i, mu, nu}) = v.truncated(order);
        }
  return R;
}

TensorField curvature_Lambda(const ClassicalConnection& L) {
  if (L.order() < 1) throw OrderError("curvature_Lambda: coefficients need order >= 1");
  const int m = L.m();
  const int order = L.order() - 1;
  TensorField R(L.coeffs.space(), {SlotKind::BaseDown, SlotKind::BaseUp, SlotKind::BaseDown, SlotKind::BaseDown},
                order);
  for (int r = 0; r < m; ++r)
    for (int l = 0; l < m; ++l)
      for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
          JetPoly v = partial(L.l(l, r, mu), nu) - partial(L.l(l, r, nu), mu);
          for (int s = 0; s < m; ++s) {
            v += L.l(l, s, mu) * L.l(s, r, nu);
            v -= L.l(l, s, nu) * L.l(s, r, mu);
          }
          R.at({r, l, mu, nu}) = v.truncated(order);
        }
  return R;
}

std::vector<JetMatrix> tensor_product_connection(const GeneralLinearConnection& K, const ClassicalConnection& L,
                                                 int p, int q, int r, int s) {
  check_pair(K, L);
  if (p < 0 || q < 0 || r < 0 || s < 0) throw InputError("tensor_product_connection: negative signature");
  Signature sig;
  sig.insert(sig.end(), static_cast<std::size_t>(p), SlotKind::FiberUp);
  sig.insert(sig.end(), static_cast<std::size_t>(q), SlotKind::FiberDown);
  sig.insert(sig.end(), static_cast<std::size_t>(r), SlotKind::BaseUp);
  sig.insert(sig.end(), static_cast<std::size_t>(s), SlotKind::BaseDown);
  const int order = std::min(K.order(), L.order());
  const TensorField shape(K.coeffs.space(), sig, order);
  const int N = static_cast<int>(shape.size());
  const int nv = K.coeffs.space().num_vars();
  std::vector<JetMatrix> out;
  for (int v = 0; v < K.m(); ++v) {
    JetMatrix C(N, N, nv, order);
    for (int I = 0; I < N; ++I) {
      const auto idx = shape.unflatten(static_cast<std::size_t>(I));
      for (std::size_t slot = 0; slot < sig.size(); ++slot) {
        auto other = idx;
        for (int b = 0; b < shape.dims()[slot]; ++b) {
          other[slot] = b;
          const int J = static_cast<int>(shape.flatten(other));
          C(I, J) += slot_coefficient(sig[slot], idx[slot], b, v, K, L);
        }
      }
    }
    out.push_back(std::move(C));
  }
  return out;
}

TensorField covariant_differential(const TensorField& phi, const GeneralLinearConnection& K,
                                   const ClassicalConnection& L) {
  check_pair(K, L);
  if (phi.space().kind != SpaceKind::M) throw InputError("covariant_differential: section must live over M");
  if (phi.space().m != K.m() || phi.space().n != K.n()) throw InputError("covariant_differential: dimension mismatch");
  if (phi.order() < 1) throw OrderError("covariant_differential: section needs order >= 1");
  for (SlotKind k : phi.signature()) {
    if (k == SlotKind::TotalUp || k == SlotKind::TotalDown) {
      throw InputError("covariant_differential: total slots are not sections over M");
    }
  }
  const int order = std::min({phi.order() - 1, K.order(), L.order()});
  Signature sig = phi.signature();
  sig.push_back(SlotKind::BaseDown);
  TensorField out(phi.space(), sig, order);
  const int m = phi.space().m;
  std::vector<int> src;
  for_each_index(phi.dims(), [&](const std::vector<int>& idx) {
    for (int v = 0; v < m; ++v) {
      JetPoly c = partial(phi.at(idx), v).truncated(order);
      for (std::size_t slot = 0; slot < idx.size(); ++slot) {
        src = idx;
        for (int b = 0; b < phi.dims()[slot]; ++b) {
          src[slot] = b;
          const JetPoly& val = phi.at(src);
          if (val.is_zero()) continue;
          c -= slot_coefficient(phi.signature()[slot], idx[slot], b, v, K, L) * val;
        }
      }
      auto full = idx;
      full.push_back(v);
      out.at(full) = c.truncated(order);
    }
  });
  return out;
}

std::vector<TensorField> iterated_covariant_differential(const TensorField& phi, const GeneralLinearConnection& K,
                                                         const ClassicalConnection& L, int k) {
  if (k < 0) throw InputError("iterated_covariant_differential: negative count");
  if (phi.order() < k) throw OrderError("iterated_covariant_differential: truncation order exhausted");
  std::vector<TensorField> out{phi};
  for (int j = 0; j < k; ++j) out.push_back(covariant_differential(out.back(), K, L));
  return out;
}

CurvatureJets curvature_jets(const GeneralLinearConnection& K, const ClassicalConnection& L, int i) {
  check_pair(K, L);
  if (!L.is_symmetric()) throw InputError("curvature_jets: classical connection must be symmetric");
  if (i < 0) throw InputError("curvature_jets: negative order");
  if (K.order() < i + 1 || L.order() < i + 1) throw OrderError("curvature_jets: truncation order exhausted");
  CurvatureJets out;
  out.lambda = iterated_covariant_differential(curvature_Lambda(L), K, L, i);
  out.k = iterated_covariant_differential(curvature_K(K), K, L, i);
  return out;
}

}  // namespace bundleconn
