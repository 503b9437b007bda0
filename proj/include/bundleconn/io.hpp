#pragma once

// JSON scenes and report records.  Rationals are "num/den" strings; a jet is
// a list of {"exponents": [...], "coeff": "num/den"} terms.

#include <cstdint>
#include <optional>
#include <string>

#include "bundleconn/natural.hpp"
#include "bundleconn/random.hpp"
#include "json.hpp"

namespace bundleconn {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const Rational& q);
Rational rational_from_json(const Json& j);
Json to_json(const JetPoly& p);
JetPoly jet_from_json(const Json& j, int num_vars, int order);
/// {"space", "m", "n", "signature", "order", "components": [{"index", "terms"}]}; zero components omitted.
Json to_json(const TensorField& t);
Json to_json(const Params15& p);
Json to_json(const Params14& p);
Params15 params15_from_json(const Json& j);
Params14 params14_from_json(const Json& j);

struct Scene {
  int m = 1;
  int n = 1;
  int order = 2;
  std::vector<Rational> point;  ///< base point, length m
  ClassicalConnection lambda;
  GeneralLinearConnection k;
  std::optional<Params15> params15;
  std::optional<Params14> params14;
  std::optional<std::uint64_t> seed;
  int derivatives = 0;  ///< highest nabla^i R reported by the curvature command
};

/// Accepts coefficients either as nested arrays of term lists or as a sparse
/// list of {"index", "terms"} records.  Throws InputError on any inconsistency.
Scene scene_from_json(const Json& j);
Json scene_to_json(const Scene& s);
Scene load_scene(const std::string& path);
Scene random_scene(Rng& rng, int m, int n, int order, bool symmetric = false);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string scene_digest(const Scene& s);

}  // namespace bundleconn
