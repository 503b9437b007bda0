#pragma once

// Single-trial property checks shared by the CLI verify suites and the
// acceptance runner.  Each returns the first counterexample, or nullopt.

#include <optional>
#include <string>

#include "bundleconn/natural.hpp"
#include "bundleconn/random.hpp"

namespace bundleconn {

struct Mismatch {
  std::string what;
  std::size_t component_index = 0;
  std::string lhs;
  std::string rhs;
};

/// Componentwise comparison after truncating both sides to their common order.
std::optional<Mismatch> first_mismatch(const TensorField& a, const TensorField& b, const std::string& what);

/// The four covariant-derivative identities defining induce_D, on random lifted fields.
std::optional<Mismatch> check_prop21(const ClassicalConnection& L, const GeneralLinearConnection& K, Rng& rng);
/// chi(induce_D) = induce_Gamma.
std::optional<Mismatch> check_chi(const ClassicalConnection& L, const GeneralLinearConnection& K);
/// Geometric assemblies against coordinate expressions for both families.
std::optional<Mismatch> check_geometric(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                        const Params15& p15, const Params14& p14);
/// chi~(h^K(T^ (x) I)) = -chi~(T^ (x) nu_K) and chi(D~(p)) = Gamma~(params15_to_14(p)).
std::optional<Mismatch> check_kernel_identity(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                              const Params15& p15);
/// Every coefficient of induce_Gamma_tilde has vanishing second derivatives in the y^i_l.
std::optional<Mismatch> check_affine(const ClassicalConnection& L, const GeneralLinearConnection& K,
                                     const Params14& p14);

/// Dimension of the kernel of params15_to_14_matrix().
int params15_to_14_kernel_dimension();

}  // namespace bundleconn
