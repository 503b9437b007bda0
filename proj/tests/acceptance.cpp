// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bundleconn/checks.hpp"
#include "bundleconn/equivariance.hpp"

using namespace bundleconn;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Fails the outcome on the first counterexample and keeps its description.
void record(Outcome& out, const std::optional<Mismatch>& m, int scene) {
  if (!m || !out.ok) return;
  out.ok = false;
  std::ostringstream s;
  s << m->what << " on scene " << scene << ", component " << m->component_index << ": " << m->lhs << " vs " << m->rhs;
  out.detail = s.str();
}

Params15 draw15(Rng& rng) { return random_params15(rng); }
Params14 draw14(Rng& rng) { return random_params14(rng); }

Outcome weights() {
  std::vector<std::string> one;
  for (const auto& w : weight_solutions(2, 2, -1)) one.push_back(to_string(w));
  std::vector<std::string> two;
  for (const auto& w : weight_solutions(2, 2, -2)) two.push_back(to_string(w));
  std::sort(one.begin(), one.end());
  std::sort(two.begin(), two.end());
  const std::vector<std::string> want1{"a0=1", "c=1"};
  const std::vector<std::string> want2{"a0=1, c=1", "a0=2", "a1=1", "b0=1", "c=2", "d0=1"};
  Outcome out;
  out.ok = one == want1 && two == want2;
  out.detail = std::to_string(one.size()) + " solutions for rhs -1, " + std::to_string(two.size()) + " for rhs -2";
  return out;
}

Outcome family_dimensions() {
  Rng rng(2002);
  const int g15 = family_rank(Family::Phi15, 2, 2, false, rng).rank;
  const int g14 = family_rank(Family::Phi14, 2, 2, false, rng).rank;
  const int s15 = family_rank(Family::Phi15, 2, 2, true, rng).rank;
  const int s14 = family_rank(Family::Phi14, 2, 2, true, rng).rank;
  Outcome out;
  out.ok = g15 == 15 && g14 == 14 && s15 == 4 && s14 == 4;
  out.detail = "m=n=2: generic " + std::to_string(g15) + "/" + std::to_string(g14) + " (want 15/14), symmetric " +
               std::to_string(s15) + "/" + std::to_string(s14) + " (want 4/4)";
  return out;
}

Outcome defining_properties() {
  Outcome out;
  Rng rng(2003);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 4, false);
    const auto K = random_linear_connection(rng, m, n, 4);
    record(out, check_prop21(L, K, rng), t);
  }
  if (out.ok) out.detail = "4 identities on 20 scenes";
  return out;
}

Outcome chi_consistency() {
  Outcome out;
  Rng rng(2004);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, t % 5 == 0);
    const auto K = random_linear_connection(rng, m, n, 3);
    record(out, check_chi(L, K), t);
  }
  if (out.ok) out.detail = "chi(D) = Gamma on 20 scenes";
  return out;
}

Outcome naturality() {
  Outcome out;
  const NaturalityConfig cfg;  // m = n = 2, order 4, morphism order 6
  std::ostringstream s;
  std::uint64_t seed = 2005;
  for (const auto& name : natural_operator_names()) {
    const auto r = verify_naturality(name, 20, seed++, cfg);
    s << name << " " << r.passes << "/" << r.trials << ", ";
    if (!r.ok()) out.ok = false;
  }
  Rng rng(2006);
  const auto p = draw15(rng);
  const NaturalOperator mutant{"phi15_mutant", ObjectKind::TensorE,
                               [p](const ClassicalConnection& L, const GeneralLinearConnection& K) {
                                 auto terms = natural_terms(p);
                                 terms.k1 += 1;
                                 return phi15_from_terms(L, K, terms);
                               }};
  const auto mr = verify_naturality(mutant, 20, 2007, cfg);
  const bool caught = !mr.ok();
  if (!caught) out.ok = false;
  s << "mutant " << (caught ? "rejected" : "NOT rejected") << " (" << mr.failures.size() << "/" << mr.trials
    << " trials differ)";
  out.detail = s.str();
  return out;
}

Outcome kernel() {
  Outcome out;
  const int dim = params15_to_14_kernel_dimension();
  if (dim != 1) {
    out.ok = false;
    out.detail = "kernel dimension " + std::to_string(dim);
    return out;
  }
  Rng rng(2008);
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    if (torsion_split(L).torsion.is_zero()) {
      out.ok = false;
      out.detail = "scene " + std::to_string(t) + " drew a torsion-free connection";
      return out;
    }
    record(out, check_kernel_identity(L, K, draw15(rng)), t);
  }
  if (out.ok) out.detail = "kernel dimension 1, identity on 10 torsionful scenes";
  return out;
}

Outcome affine() {
  Outcome out;
  Rng rng(2009);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    record(out, check_affine(L, K, draw14(rng)), t);
  }
  if (out.ok) out.detail = "second y_l derivatives vanish on 20 scenes";
  return out;
}

Outcome geometric() {
  Outcome out;
  Rng rng(2010);
  for (int t = 0; t < 10; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto K = random_linear_connection(rng, m, n, 3);
    const auto p15 = draw15(rng);
    record(out, check_geometric(L, K, p15, draw14(rng)), t);
  }
  if (out.ok) out.detail = "both families on 10 scenes";
  return out;
}

// Ricci identities, Leibniz rule, torsion-split reconstruction, theta o d = 0.
Outcome calculus() {
  Outcome out;
  Rng rng(2011);
  for (int t = 0; t < 5; ++t) {
    const int m = 2 + t % 2;
    const int n = 1 + t % 2;
    const Space M = Space::base(m, n);
    const auto K = random_linear_connection(rng, m, n, 4);
    const auto Ls = random_classical_connection(rng, m, n, 4, true);

    const auto s = random_tensor(rng, M, {SlotKind::FiberUp}, 4);
    const auto dds = iterated_covariant_differential(s, K, Ls, 2)[2];
    const auto RK = curvature_K(K);
    TensorField lhs(M, {SlotKind::FiberUp, SlotKind::BaseDown, SlotKind::BaseDown}, 2);
    TensorField rhs = lhs;
    const auto X = random_tensor(rng, M, {SlotKind::BaseUp}, 4);
    const auto ddX = iterated_covariant_differential(X, K, Ls, 2)[2];
    const auto RL = curvature_Lambda(Ls);
    TensorField lhsX(M, {SlotKind::BaseUp, SlotKind::BaseDown, SlotKind::BaseDown}, 2);
    TensorField rhsX = lhsX;
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) {
        for (int i = 0; i < n; ++i) {
          lhs.at({i, mu, nu}) = (dds.at({i, nu, mu}) - dds.at({i, mu, nu})).truncated(2);
          JetPoly v(m, 2);
          for (int j = 0; j < n; ++j) v += RK.at({j, i, mu, nu}) * s.at({j});
          rhs.at({i, mu, nu}) = v.truncated(2);
        }
        for (int l = 0; l < m; ++l) {
          lhsX.at({l, mu, nu}) = (ddX.at({l, nu, mu}) - ddX.at({l, mu, nu})).truncated(2);
          JetPoly v(m, 2);
          for (int r = 0; r < m; ++r) v += RL.at({r, l, mu, nu}) * X.at({r});
          rhsX.at({l, mu, nu}) = v.truncated(2);
        }
      }
    record(out, first_mismatch(lhs, rhs, "Ricci identity for K"), t);
    record(out, first_mismatch(lhsX, rhsX, "Ricci identity for Lambda"), t);

    const auto L = random_classical_connection(rng, m, n, 3, false);
    const auto a = random_tensor(rng, M, {SlotKind::FiberUp, SlotKind::BaseDown}, 3);
    const auto b = random_tensor(rng, M, {SlotKind::FiberDown, SlotKind::BaseUp}, 3);
    const auto whole = covariant_differential(tensor_product(a, b), K, L);
    const std::vector<int> perm{0, 1, 3, 4, 2};
    const auto parts = permute(tensor_product(covariant_differential(a, K, L), b), perm) +
                       tensor_product(a, covariant_differential(b, K, L));
    record(out, first_mismatch(whole, parts, "Leibniz rule"), t);

    const auto split = torsion_split(L);
    TensorField rebuilt = split.sym.coeffs;
    for_each_index(L.coeffs.dims(), [&](const std::vector<int>& i) {
      rebuilt.at(i) += split.torsion.at({i[1], i[0], i[2]});
    });
    record(out, first_mismatch(rebuilt, L.coeffs, "torsion split reconstruction"), t);
    if (!split.sym.is_symmetric()) record(out, Mismatch{"symmetric part is not symmetric", 0, "", ""}, t);

    const auto c = contact_maps(m, n, 2);
    const auto td = contract(tensor_product(c.d, c.theta), 1, 2);
    if (!td.is_zero()) record(out, Mismatch{"theta o d does not vanish", 0, "", ""}, t);
  }
  if (out.ok) out.detail = "Ricci (K, Lambda), Leibniz, torsion split, theta o d on 5 scenes each";
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "weight-equation counts", 1, weights},
      {2, "family dimensions", 30, family_dimensions},
      {3, "induce_D defining properties", 30, defining_properties},
      {4, "chi consistency", 10, chi_consistency},
      {5, "naturality", 120, naturality},
      {6, "params15_to_14 kernel", 10, kernel},
      {7, "induce_Gamma_tilde affineness", 10, affine},
      {8, "geometric vs coordinate", 30, geometric},
      {9, "calculus sanity", 10, calculus},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool ok = out.ok && in_time;
    if (!ok) ++failed;
    std::printf("criterion %d %s: %s [%.2f s, limit %.0f s] %s%s\n", c.id, c.name, ok ? "PASS" : "FAIL", secs,
                c.limit_s, out.detail.c_str(), in_time ? "" : " (over time limit)");
    std::fflush(stdout);
    if (c.id == 2) {
      Rng rng(2012);
      const int g15 = family_rank(Family::Phi15, 3, 2, false, rng).rank;
      const int g14 = family_rank(Family::Phi14, 3, 2, false, rng).rank;
      std::printf("  info: m=3, n=2 generic ranks %d/%d\n", g15, g14);
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
