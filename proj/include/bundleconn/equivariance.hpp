#pragma once

// Fiber-linear bundle morphisms (x, y) -> (f(x), a(x) y) as jets at the origin,
// their action on connections and tensors, and the checks built on them.
//
// Transformation laws use the inverse map psi (new coordinates -> old):
//   connection matrices  w'_C' = P^C_C' G (w_C o psi) G^-1 + (d_C' G) G^-1
//   tensors              up slots multiplied by G, down slots by P = G^-1
// with G the Jacobian of the forward map evaluated along psi.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bundleconn/natural.hpp"
#include "bundleconn/random.hpp"

namespace bundleconn {

struct MorphismJet {
  int m = 1;
  int n = 1;
  std::vector<JetPoly> base;  ///< f, m centered jets in m variables
  JetMatrix fiber;            ///< a(x), n x n jets in m variables

  MorphismJet() = default;
  MorphismJet(std::vector<JetPoly> f, JetMatrix a);
  static MorphismJet identity(int m, int n, int order);
  int order() const;
  /// Throws SingularError unless the linear part of f and a(0) are invertible.
  void validate() const;
};

/// this o other: x -> f(g(x)), a(g(x)) b(x).
MorphismJet compose(const MorphismJet& outer, const MorphismJet& inner);
MorphismJet random_morphism(Rng& rng, int m, int n, int order);

/// Element of the (1,1) jet group: fiber part a, its first derivative a1[i][j][l], base linear part b.
struct GroupElement11 {
  RationalMatrix a;
  std::vector<Rational> a1;  ///< a^i_{jl} at index (i*n + j)*m + l
  RationalMatrix b;
  RationalMatrix a_inv;
  RationalMatrix b_inv;
  /// First derivative of the inverse fiber part in the new base coordinates.
  std::vector<Rational> a1_inv;

  GroupElement11() = default;
  GroupElement11(RationalMatrix a, std::vector<Rational> a1, RationalMatrix b);
  static GroupElement11 identity(int m, int n);
  static GroupElement11 from_morphism(const MorphismJet& phi);

  int m() const { return b.rows(); }
  int n() const { return a.rows(); }
  const Rational& da(int i, int j, int l) const { return a1[static_cast<std::size_t>((i * n() + j) * m() + l)]; }
  const Rational& da_inv(int i, int j, int l) const {
    return a1_inv[static_cast<std::size_t>((i * n() + j) * m() + l)];
  }
};

/// The 1-jet of outer o inner.
GroupElement11 compose(const GroupElement11& outer, const GroupElement11& inner);

/// Dense value of a (TotalDown, TotalUp, TotalDown) tensor at one point, index [B][A][C].
using Phi3 = std::vector<Rational>;

/// The group action on T*E (x) TE (x) T*E written out blockwise.
Phi3 action_2_1_to_2_8(const GroupElement11& g, const Phi3& phi, const std::vector<Rational>& y);

struct JetFiberPoint {
  std::vector<Rational> y;
  std::vector<Rational> ylam;  ///< y^i_l at index i*m + l
  friend bool operator==(const JetFiberPoint&, const JetFiberPoint&) = default;
};

JetFiberPoint action_J1E(const GroupElement11& g, const JetFiberPoint& p);

ClassicalConnection transform_classical(const ClassicalConnection& L, const MorphismJet& phi);
GeneralLinearConnection transform_linear(const GeneralLinearConnection& K, const MorphismJet& phi);
ClassicalConnectionOnE transform_connection_E(const ClassicalConnectionOnE& D, const MorphismJet& phi);
ConnectionOnJ1E transform_connection_J1E(const ConnectionOnJ1E& G, const MorphismJet& phi);
TensorField transform_tensor(const TensorField& t, const MorphismJet& phi);

// ------------------------------------------------------------ naturality

enum class ObjectKind { ConnectionE, ConnectionJ1E, TensorE, TensorJ1E };

struct NaturalOperator {
  std::string name;
  ObjectKind kind;
  /// Builds the object's coefficient table from (L, K); params are fixed by the caller.
  std::function<TensorField(const ClassicalConnection&, const GeneralLinearConnection&)> build;
};

/// One of induce_D, phi15, induce_D_tilde, induce_Gamma, phi14, induce_Gamma_tilde.
NaturalOperator named_operator(const std::string& name, const Params15& p15, const Params14& p14);
const std::vector<std::string>& natural_operator_names();

struct NaturalityFailure {
  int trial = 0;
  std::size_t component_index = 0;
  std::vector<int> component;
  std::string lhs;
  std::string rhs;
};

struct NaturalityReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  int passes = 0;
  std::vector<NaturalityFailure> failures;
  bool ok() const { return failures.empty() && passes == trials; }
};

struct NaturalityConfig {
  int m = 2;
  int n = 2;
  int order = 4;           ///< truncation order of L and K
  int morphism_order = 6;  ///< truncation order of the morphism jets; order + 2 keeps full precision
  bool symmetric = false;
  /// Random params drawn per trial when unset.
  std::optional<Params15> params15;
  std::optional<Params14> params14;
  /// Fixed inputs; random per trial when unset.
  std::optional<ClassicalConnection> lambda;
  std::optional<GeneralLinearConnection> k;
};

/// Compares compute-then-transform with transform-then-compute on random inputs.
NaturalityReport verify_naturality(const std::string& name, int trials, std::uint64_t seed,
                                   const NaturalityConfig& cfg = {});
NaturalityReport verify_naturality(const NaturalOperator& op, int trials, std::uint64_t seed,
                                   const NaturalityConfig& cfg = {});

Params15 random_params15(Rng& rng);
Params14 random_params14(Rng& rng);

// ----------------------------------------------------------- counting

struct WeightSolution {
  std::vector<int> a;  ///< a_0..a_s, weight i+1
  std::vector<int> b;  ///< b_0..b_{s-1}, weight j+2
  int c = 0;           ///< weight 1
  std::vector<int> d;  ///< d_0..d_{r-1}, weight k+2
  friend bool operator==(const WeightSolution&, const WeightSolution&) = default;
};

/// All non-negative integer solutions of sum (i+1)a_i + (j+2)b_j + c + (k+2)d_k = -rhs.
std::vector<WeightSolution> weight_solutions(int s, int r, int rhs);
std::string to_string(const WeightSolution& w);

/// Exact rank of the matrix whose rows are the given flattened evaluations.
int family_rank(const std::vector<std::vector<Rational>>& basis);

enum class Family { Phi15, Phi14 };

struct RankResult {
  int rank = 0;
  int draws = 0;
  std::vector<int> rank_by_draw;
};

/// Evaluates every basis member at random (L, K, point) draws until the rank is
/// full or unchanged over three consecutive draws.
RankResult family_rank(Family family, int m, int n, bool symmetric, Rng& rng, int order = 3);

}  // namespace bundleconn
