#pragma once

// Linear connections on E -> M and classical connections on M, with their
// torsion, curvature and covariant differentials.
//
// Sign conventions (single source; everything else follows by Leibniz):
//   sections of E:   nabla_v s^i   = d_v s^i   - K^i_{jv} s^j
//   vector fields:   nabla_v X^l   = d_v X^l   - L^l_{rv} X^r
//   dual slots pick up the transposed coefficient with a plus sign.
// Curvatures are normalized by the Ricci identity
//   (nabla_m nabla_n - nabla_n nabla_m) s^i = R^i_{j m n} s^j   (symmetric L),
// where nabla_m nabla_n s is the component [i][n][m] of the second differential.

#include <utility>
#include <vector>

#include "bundleconn/tensor.hpp"

namespace bundleconn {

/// K^i_{jl}(x), stored with signature (FiberUp i, FiberDown j, BaseDown l) over M.
struct GeneralLinearConnection {
  TensorField coeffs;

  GeneralLinearConnection() = default;
  GeneralLinearConnection(int m, int n, int order);
  explicit GeneralLinearConnection(TensorField c);

  int m() const { return coeffs.space().m; }
  int n() const { return coeffs.space().n; }
  int order() const { return coeffs.order(); }
  JetPoly& k(int i, int j, int l) { return coeffs.at({i, j, l}); }
  const JetPoly& k(int i, int j, int l) const { return coeffs.at({i, j, l}); }
};

/// L^l_{mn}(x), stored with signature (BaseUp l, BaseDown m, BaseDown n) over M.
/// The space carries the fiber dimension so that results combine with K-tensors.
struct ClassicalConnection {
  TensorField coeffs;
  bool symmetric = false;

  ClassicalConnection() = default;
  ClassicalConnection(int m, int n, int order);
  explicit ClassicalConnection(TensorField c, bool symmetric_claim = false);

  int m() const { return coeffs.space().m; }
  int n() const { return coeffs.space().n; }
  int order() const { return coeffs.order(); }
  JetPoly& l(int a, int b, int c) { return coeffs.at({a, b, c}); }
  const JetPoly& l(int a, int b, int c) const { return coeffs.at({a, b, c}); }
  /// Exact check of L^l_{mn} = L^l_{nm}.
  bool is_symmetric() const;
  /// Throws InputError when the symmetric claim is false.
  void validate() const;
};

struct TorsionSplit {
  ClassicalConnection sym;
  /// T_m^l_n = (L^l_{mn} - L^l_{nm}) / 2, signature (BaseDown m, BaseUp l, BaseDown n).
  TensorField torsion;
};

TorsionSplit torsion_split(const ClassicalConnection& L);
/// T^r_{rn}, a BaseDown 1-form.
TensorField torsion_trace(const TensorField& torsion);

/// R^i_{jmn} stored (FiberDown j, FiberUp i, BaseDown m, BaseDown n).
TensorField curvature_K(const GeneralLinearConnection& K);
/// R^l_{rmn} stored (BaseDown r, BaseUp l, BaseDown m, BaseDown n).
TensorField curvature_Lambda(const ClassicalConnection& L);

/// Connection coefficients on sections of E^{p,r}_{q,s}: for each form index v a
/// square matrix C_v on the flattened components, with nabla_v Phi = d_v Phi - C_v Phi.
/// Component order: p FiberUp, q FiberDown, r BaseUp, s BaseDown slots.
std::vector<JetMatrix> tensor_product_connection(const GeneralLinearConnection& K, const ClassicalConnection& L,
                                                 int p, int q, int r, int s);

/// Appends a BaseDown slot; Phi must live over M and use only Base/Fiber slots.
TensorField covariant_differential(const TensorField& phi, const GeneralLinearConnection& K,
                                   const ClassicalConnection& L);
/// [Phi, nabla Phi, ..., nabla^k Phi].
std::vector<TensorField> iterated_covariant_differential(const TensorField& phi, const GeneralLinearConnection& K,
                                                         const ClassicalConnection& L, int k);

struct CurvatureJets {
  std::vector<TensorField> lambda;  ///< nabla^j R[L], j = 0..i
  std::vector<TensorField> k;       ///< nabla^j R[K], j = 0..i
};

/// Requires a symmetric L.
CurvatureJets curvature_jets(const GeneralLinearConnection& K, const ClassicalConnection& L, int i);

}  // namespace bundleconn
