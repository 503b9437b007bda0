#pragma once

// Natural connections on E and on J1E induced by (L, K), together with the
// tensor families that parameterize all of them.
//
// Storage:
//   D on E     : D_B^A_C      as [B][A][C], signature (TotalDown, TotalUp, TotalDown)
//   Gamma      : Gamma_A^i_l  as [A][i][l], signature (TotalDown, FiberUp, BaseDown)
//   Phi (E)    : same layout as D
//   phi (J1E)  : phi_A^i_m    as [A][m][i], signature (TotalDown, BaseDown, FiberUp)
// Covariant derivative on E: nabla_C Z^A = d_C Z^A - D_B^A_C Z^B.

#include <array>
#include <string>
#include <vector>

#include "bundleconn/connections.hpp"
#include "bundleconn/linalg.hpp"

namespace bundleconn {

struct ClassicalConnectionOnE {
  TensorField coeffs;

  ClassicalConnectionOnE() = default;
  ClassicalConnectionOnE(int m, int n, int order);
  explicit ClassicalConnectionOnE(TensorField c);

  int m() const { return coeffs.space().m; }
  int n() const { return coeffs.space().n; }
  int order() const { return coeffs.order(); }
  JetPoly& d(int b, int a, int c) { return coeffs.at({b, a, c}); }
  const JetPoly& d(int b, int a, int c) const { return coeffs.at({b, a, c}); }
};

struct ConnectionOnJ1E {
  TensorField coeffs;

  ConnectionOnJ1E() = default;
  ConnectionOnJ1E(int m, int n, int order);
  explicit ConnectionOnJ1E(TensorField c);

  int m() const { return coeffs.space().m; }
  int n() const { return coeffs.space().n; }
  int order() const { return coeffs.order(); }
  JetPoly& g(int a, int i, int l) { return coeffs.at({a, i, l}); }
  const JetPoly& g(int a, int i, int l) const { return coeffs.at({a, i, l}); }
};

struct Params15 {
  Rational a1, a2, a3, b1, b2, b3, c1, c2, c3, d1, d2, e1, e2, h1, h2;

  static constexpr int kSize = 15;
  static const std::array<const char*, kSize>& names();
  std::vector<Rational> values() const;
  static Params15 from_values(const std::vector<Rational>& v);
  /// The parameter vector with a single 1 at position k.
  static Params15 unit(int k);
  friend bool operator==(const Params15&, const Params15&) = default;
};

struct Params14 {
  Rational a1, a2, a3, b1, b2, b3, c1, c2, c3, d1, d2, e1, e2, h1;

  static constexpr int kSize = 14;
  static const std::array<const char*, kSize>& names();
  std::vector<Rational> values() const;
  static Params14 from_values(const std::vector<Rational>& v);
  static Params14 unit(int k);
  friend bool operator==(const Params14&, const Params14&) = default;
};

/// Per-term coefficients of the Phi family on E.  The three k-terms are the
/// K-dependent corrections that make the family natural:
///   k3: T^_m K^i_{jn} y^j,   k2: T^_n K^i_{jm} y^j,   k1: T_m^r_n K^i_{jr} y^j.
/// phi15 sets k3 = a3 - h2, k2 = a2 - h1, k1 = a1.
struct Phi15Terms {
  Params15 p;
  Rational k1, k2, k3;
};

/// Per-term coefficients of the phi family on J1E:
///   k3: T^_l K^i_{jm} y^j,   k2: T^_m K^i_{jl} y^j,   k1: T_l^r_m K^i_{jr} y^j.
/// phi14 sets k3 = -a3, k2 = -(a2 + h1), k1 = -a1.
struct Phi14Terms {
  Params14 p;
  Rational k1, k2, k3;
};

Phi15Terms natural_terms(const Params15& p);
Phi14Terms natural_terms(const Params14& p);

/// Torsion, its trace, nabla~T, R[L~] and R[K] computed once per (L, K).
struct Ingredients {
  TensorField torsion;        ///< (BaseDown, BaseUp, BaseDown)
  TensorField torsion_trace;  ///< (BaseDown)
  TensorField nabla_torsion;  ///< (BaseDown, BaseUp, BaseDown, BaseDown), last slot = derivative
  TensorField curvature_sym;  ///< R[L~], (BaseDown, BaseUp, BaseDown, BaseDown)
  TensorField curvature_k;    ///< R[K], (FiberDown, FiberUp, BaseDown, BaseDown)
};

Ingredients ingredients(const ClassicalConnection& L, const GeneralLinearConnection& K);

ClassicalConnectionOnE induce_D(const ClassicalConnection& L, const GeneralLinearConnection& K);

/// h^K(X) = X^l d_l + K^i_{jl} y^j X^l d_i for a BaseUp field X over M or E.
TensorField horizontal_lift(const GeneralLinearConnection& K, const TensorField& X);
/// nu_K = (d^i - K^i_{jl} y^j d^l) (x) d_i, signature (TotalDown, FiberUp) over E.
TensorField vertical_projection(const GeneralLinearConnection& K);
/// Vertical lift s^V of a FiberUp section over M.
TensorField vertical_lift(const TensorField& s);

/// a1 T + a2 I (x) T^ + a3 T^ (x) I, layout (BaseDown m, BaseUp l, BaseDown n) over M.
TensorField S_of(const ClassicalConnection& L, const Rational& a1, const Rational& a2, const Rational& a3);
/// The nine-term (0,2) tensor, layout (BaseDown m, BaseDown n) over M.
TensorField G_of(const ClassicalConnection& L, const GeneralLinearConnection& K, const Params15& p);
TensorField G_of(const Ingredients& ing, const Params15& p);

TensorField phi15(const ClassicalConnection& L, const GeneralLinearConnection& K, const Params15& p);
TensorField phi15_from_terms(const ClassicalConnection& L, const GeneralLinearConnection& K, const Phi15Terms& t);
TensorField phi15_from_terms(const Ingredients& ing, const GeneralLinearConnection& K, const Phi15Terms& t);
/// h^K(S) + L (x) G + e2 R[K](L) + H, assembled slotwise from the geometric pieces.
TensorField phi15_geometric(const ClassicalConnection& L, const GeneralLinearConnection& K, const Params15& p);

ClassicalConnectionOnE induce_D_tilde(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                      const Params15& p);

ConnectionOnJ1E chi(const ClassicalConnectionOnE& D);
ConnectionOnJ1E induce_Gamma(const ClassicalConnection& L, const GeneralLinearConnection& K);

struct ContactMaps {
  TensorField d;      ///< d^l (x) (d_l + y^i_l d_i), layout (BaseDown l, TotalUp A) over J1E
  TensorField theta;  ///< (d^i - y^i_l d^l) (x) d_i, layout (TotalDown A, FiberUp i) over J1E
};

ContactMaps contact_maps(int m, int n, int order);
/// Both maps evaluated at one jet point (x, y, y_l); components are constants.
ContactMaps contact_maps(int m, int n, std::span<const Rational> jet_point);

TensorField phi14(const ClassicalConnection& L, const GeneralLinearConnection& K, const Params14& p);
TensorField phi14_from_terms(const ClassicalConnection& L, const GeneralLinearConnection& K, const Phi14Terms& t);
TensorField phi14_from_terms(const Ingredients& ing, const GeneralLinearConnection& K, const Phi14Terms& t);
/// theta o h^K(S) + L (x) G + e2 R[K](L) + h1 nu_K (x) T^, assembled on J1E.
TensorField phi14_geometric(const ClassicalConnection& L, const GeneralLinearConnection& K, const Params14& p);

ConnectionOnJ1E induce_Gamma_tilde(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                   const Params14& p);
/// Gamma + phi, reading phi through VJ1E = J1E x T*M (x) VE.
ConnectionOnJ1E add_phi(const ConnectionOnJ1E& gamma, const TensorField& phi);

/// id (x) theta (x) d applied to a (TotalDown, TotalUp, TotalDown) tensor on E or J1E.
/// Result has the phi layout (TotalDown, BaseDown, FiberUp) over J1E.
TensorField chi_tilde(const TensorField& phi);

/// Matrix of the linear map Params15 -> Params14 (rows: Params14 order).
const RationalMatrix& params15_to_14_matrix();
Params14 params15_to_14(const Params15& p);

}  // namespace bundleconn
