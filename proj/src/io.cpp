#include "bundleconn/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bundleconn/error.hpp"

namespace bundleconn {

Json to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw InputError("expected a rational as \"num/den\", got " + j.dump());
}

Json to_json(const JetPoly& p) {
  Json terms = Json::array();
  for (const auto& [mi, c] : p.terms()) terms.push_back({{"exponents", mi.exponents()}, {"coeff", to_string(c)}});
  return terms;
}

JetPoly jet_from_json(const Json& j, int num_vars, int order) {
  if (!j.is_array()) throw InputError("jet must be a list of terms");
  JetPoly::TermMap terms;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("exponents") || !t.contains("coeff")) {
      throw InputError("jet term needs \"exponents\" and \"coeff\"");
    }
    const auto exps = t.at("exponents").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != num_vars) throw InputError("jet term has wrong number of exponents");
    int degree = 0;
    for (int e : exps) {
      if (e < 0) throw InputError("negative exponent");
      degree += e;
    }
    if (degree > order) throw InputError("jet term of degree " + std::to_string(degree) + " exceeds order");
    terms[MultiIndex::from_span(exps)] += rational_from_json(t.at("coeff"));
  }
  return JetPoly::from_terms(num_vars, order, std::move(terms));
}

Json to_json(const TensorField& t) {
  Json sig = Json::array();
  for (auto k : t.signature()) sig.push_back(to_string(k));
  Json comps = Json::array();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.flat(k).is_zero()) continue;
    comps.push_back({{"index", t.unflatten(k)}, {"terms", to_json(t.flat(k))}});
  }
  return {{"space", to_string(t.space().kind)}, {"m", t.space().m},     {"n", t.space().n},
          {"signature", sig},                   {"order", t.order()},   {"components", comps}};
}

namespace {

template <typename P>
Json params_to_json(const P& p) {
  Json j = Json::object();
  const auto v = p.values();
  for (int k = 0; k < P::kSize; ++k) j[P::names()[k]] = to_string(v[k]);
  return j;
}

template <typename P>
P params_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("params must be an object of named rationals");
  std::vector<Rational> v(P::kSize);
  for (const auto& [key, value] : j.items()) {
    const auto& names = P::names();
    const auto it = std::find_if(names.begin(), names.end(), [&](const char* s) { return key == s; });
    if (it == names.end()) throw InputError("unknown parameter: " + key);
    v[static_cast<std::size_t>(it - names.begin())] = rational_from_json(value);
  }
  return P::from_values(v);
}

// Fills `t` from nested arrays or a sparse {"index", "terms"} list.
void fill_coeffs(TensorField& t, const Json& j, int order) {
  const int nv = t.space().num_vars();
  if (!j.is_array()) throw InputError("coeffs must be an array");
  const bool sparse = j.empty() || j.front().is_object();
  if (sparse) {
    for (const auto& rec : j) {
      if (!rec.is_object() || !rec.contains("index") || !rec.contains("terms")) {
        throw InputError("sparse coefficient needs \"index\" and \"terms\"");
      }
      const auto idx = rec.at("index").get<std::vector<int>>();
      if (idx.size() != t.dims().size()) throw InputError("coefficient index has wrong arity");
      for (std::size_t s = 0; s < idx.size(); ++s)
        if (idx[s] < 0 || idx[s] >= t.dims()[s]) throw InputError("coefficient index out of range");
      t.at(idx) = jet_from_json(rec.at("terms"), nv, order);
    }
    return;
  }
  for_each_index(t.dims(), [&](const std::vector<int>& idx) {
    const Json* node = &j;
    for (int i : idx) {
      if (!node->is_array() || static_cast<int>(node->size()) <= i) throw InputError("nested coeffs have wrong shape");
      node = &(*node)[static_cast<std::size_t>(i)];
    }
    t.at(idx) = jet_from_json(*node, nv, order);
  });
}

Json sparse_coeffs(const TensorField& t) { return to_json(t).at("components"); }

int get_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) throw InputError(std::string("scene needs integer \"") + key + "\"");
  return j.at(key).get<int>();
}

}  // namespace

Json to_json(const Params15& p) { return params_to_json(p); }
Json to_json(const Params14& p) { return params_to_json(p); }
Params15 params15_from_json(const Json& j) { return params_from_json<Params15>(j); }
Params14 params14_from_json(const Json& j) { return params_from_json<Params14>(j); }

Scene scene_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("scene must be a JSON object");
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) throw InputError("unsupported scene schema");
  Scene s;
  s.m = get_int(j, "m");
  s.n = get_int(j, "n");
  s.order = get_int(j, "order");
  if (s.m < 1 || s.n < 1) throw InputError("scene dimensions must be positive");
  if (Space::jet(s.m, s.n).num_vars() > kMaxVars) throw InputError("scene dimensions too large for jet variables");
  if (s.order < 0) throw InputError("scene order must be non-negative");
  s.point.assign(static_cast<std::size_t>(s.m), 0);
  if (j.contains("point")) {
    const auto& p = j.at("point");
    if (!p.is_array() || static_cast<int>(p.size()) != s.m) throw InputError("scene point must have m entries");
    for (int i = 0; i < s.m; ++i) s.point[static_cast<std::size_t>(i)] = rational_from_json(p[static_cast<std::size_t>(i)]);
  }
  s.lambda = ClassicalConnection(s.m, s.n, s.order);
  s.k = GeneralLinearConnection(s.m, s.n, s.order);
  if (j.contains("lambda")) {
    const auto& l = j.at("lambda");
    if (l.contains("coeffs")) fill_coeffs(s.lambda.coeffs, l.at("coeffs"), s.order);
    s.lambda.symmetric = l.value("symmetric", false);
    s.lambda.validate();
  }
  if (j.contains("k") && j.at("k").contains("coeffs")) fill_coeffs(s.k.coeffs, j.at("k").at("coeffs"), s.order);
  if (j.contains("params15")) s.params15 = params15_from_json(j.at("params15"));
  if (j.contains("params14")) s.params14 = params14_from_json(j.at("params14"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw InputError("scene seed must be a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("derivatives")) {
    s.derivatives = get_int(j, "derivatives");
    if (s.derivatives < 0) throw InputError("derivatives must be non-negative");
  }
  return s;
}

Json scene_to_json(const Scene& s) {
  Json point = Json::array();
  for (const auto& q : s.point) point.push_back(to_string(q));
  Json j = {{"schema", kSchemaVersion},
            {"m", s.m},
            {"n", s.n},
            {"order", s.order},
            {"point", point},
            {"lambda", {{"symmetric", s.lambda.symmetric}, {"coeffs", sparse_coeffs(s.lambda.coeffs)}}},
            {"k", {{"coeffs", sparse_coeffs(s.k.coeffs)}}}};
  if (s.params15) j["params15"] = to_json(*s.params15);
  if (s.params14) j["params14"] = to_json(*s.params14);
  if (s.seed) j["seed"] = *s.seed;
  if (s.derivatives != 0) j["derivatives"] = s.derivatives;
  return j;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed scene JSON: ") + e.what());
  }
  return scene_from_json(j);
}

Scene random_scene(Rng& rng, int m, int n, int order, bool symmetric) {
  Scene s;
  s.m = m;
  s.n = n;
  s.order = order;
  s.point.assign(static_cast<std::size_t>(m), 0);
  s.lambda = random_classical_connection(rng, m, n, order, symmetric);
  s.k = random_linear_connection(rng, m, n, order);
  return s;
}

std::string scene_digest(const Scene& s) {
  const std::string text = scene_to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace bundleconn
