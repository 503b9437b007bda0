// bundleconn command line: curvature, induce, verify and weights reports as JSON.
//
// Exit codes: 0 pass, 1 verification failure, 2 input error, 3 insufficient order.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bundleconn/checks.hpp"
#include "bundleconn/equivariance.hpp"
#include "bundleconn/error.hpp"
#include "bundleconn/io.hpp"

using namespace bundleconn;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitOrder = 3;

const std::vector<std::string> kSuites{"prop21", "chi", "geometric", "naturality", "rank", "kernel", "affine", "weights"};

struct Options {
  std::string scene_path;
  std::string target;
  std::string suite = "all";
  std::string out;
  int trials = 20;
  std::optional<std::uint64_t> seed;
};

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw InputError("seed is not a non-negative integer: " + text);
  }
  if (used != text.size()) throw InputError("seed is not a non-negative integer: " + text);
  return v;
}

// --seed, then BUNDLECONN_SEED, then the scene's seed, then 0.
std::uint64_t resolve_seed(const Options& opt, const std::optional<Scene>& scene) {
  if (opt.seed) return *opt.seed;
  if (const char* env = std::getenv("BUNDLECONN_SEED"); env != nullptr && *env != '\0') return parse_seed(env);
  if (scene && scene->seed) return *scene->seed;
  return 0;
}

std::uint64_t suite_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ seed;
}

Json header(const std::string& command, std::uint64_t seed, const std::optional<Scene>& scene) {
  Json j = {{"schema", kSchemaVersion}, {"command", command}, {"seed", seed}};
  j["scene_digest"] = scene ? Json(scene_digest(*scene)) : Json(nullptr);
  return j;
}

Json failure_json(int trial, const Mismatch& m) {
  return {{"trial", trial}, {"check", m.what}, {"component_index", m.component_index}, {"lhs", m.lhs}, {"rhs", m.rhs}};
}

struct SuiteTally {
  int trials = 0;
  int passes = 0;
  Json failures = Json::array();
  void record(int trial, const std::optional<Mismatch>& m) {
    ++trials;
    if (m) {
      failures.push_back(failure_json(trial, *m));
    } else {
      ++passes;
    }
  }
  bool ok() const { return failures.empty(); }
  Json to_json() const { return {{"trials", trials}, {"passes", passes}, {"failures", failures}, {"passed", ok()}}; }
};

// Random scenes use m = n = 2 at order 3 unless a scene file fixes them.
Scene trial_scene(const std::optional<Scene>& scene, Rng& rng, bool symmetric = false) {
  return scene ? *scene : random_scene(rng, 2, 2, 3, symmetric);
}

Params15 trial_p15(const std::optional<Scene>& scene, Rng& rng) {
  return scene && scene->params15 ? *scene->params15 : random_params15(rng);
}

Params14 trial_p14(const std::optional<Scene>& scene, Rng& rng) {
  return scene && scene->params14 ? *scene->params14 : random_params14(rng);
}

Json run_suite(const std::string& name, const std::optional<Scene>& scene, int trials, std::uint64_t seed,
               bool& passed) {
  Rng rng(suite_seed(seed, name));
  Json out;
  if (name == "prop21") {
    SuiteTally t;
    for (int i = 0; i < trials; ++i) {
      const Scene s = trial_scene(scene, rng);
      t.record(i, check_prop21(s.lambda, s.k, rng));
    }
    out = t.to_json();
    passed = passed && t.ok();
  } else if (name == "chi") {
    SuiteTally t;
    for (int i = 0; i < (scene ? 1 : trials); ++i) {
      const Scene s = trial_scene(scene, rng);
      t.record(i, check_chi(s.lambda, s.k));
    }
    out = t.to_json();
    passed = passed && t.ok();
  } else if (name == "geometric") {
    SuiteTally t;
    for (int i = 0; i < trials; ++i) {
      const Scene s = trial_scene(scene, rng);
      t.record(i, check_geometric(s.lambda, s.k, trial_p15(scene, rng), trial_p14(scene, rng)));
    }
    out = t.to_json();
    passed = passed && t.ok();
  } else if (name == "naturality") {
    NaturalityConfig cfg;
    cfg.m = scene ? scene->m : 2;
    cfg.n = scene ? scene->n : 2;
    cfg.order = scene ? scene->order : 3;
    cfg.morphism_order = cfg.order + 2;
    if (scene) {
      cfg.lambda = scene->lambda;
      cfg.k = scene->k;
      cfg.params15 = scene->params15;
      cfg.params14 = scene->params14;
    }
    out = Json::object();
    for (const auto& op : natural_operator_names()) {
      const auto r = verify_naturality(op, trials, suite_seed(seed, "naturality/" + op), cfg);
      Json failures = Json::array();
      for (const auto& f : r.failures) {
        failures.push_back({{"trial", f.trial}, {"component_index", f.component_index}, {"lhs", f.lhs}, {"rhs", f.rhs}});
      }
      out[op] = {{"trials", r.trials}, {"passes", r.passes}, {"failures", failures}, {"passed", r.ok()}};
      passed = passed && r.ok();
    }
  } else if (name == "rank") {
    const int m = scene ? scene->m : 3;
    const int n = scene ? scene->n : 2;
    const auto r15 = family_rank(Family::Phi15, m, n, false, rng);
    const auto r14 = family_rank(Family::Phi14, m, n, false, rng);
    const auto s15 = family_rank(Family::Phi15, m, n, true, rng);
    const auto s14 = family_rank(Family::Phi14, m, n, true, rng);
    const bool ok = r15.rank == 15 && r14.rank == 14 && s15.rank == 4 && s14.rank == 4;
    out = {{"m", m},
           {"n", n},
           {"phi15", r15.rank},
           {"phi14", r14.rank},
           {"phi15_symmetric", s15.rank},
           {"phi14_symmetric", s14.rank},
           {"expected", {{"phi15", 15}, {"phi14", 14}, {"phi15_symmetric", 4}, {"phi14_symmetric", 4}}},
           {"draws", {{"phi15", r15.rank_by_draw}, {"phi14", r14.rank_by_draw}}},
           {"passed", ok}};
    passed = passed && ok;
  } else if (name == "kernel") {
    const int dim = params15_to_14_kernel_dimension();
    SuiteTally t;
    for (int i = 0; i < trials; ++i) {
      const Scene s = trial_scene(scene, rng);
      t.record(i, check_kernel_identity(s.lambda, s.k, trial_p15(scene, rng)));
    }
    out = t.to_json();
    out["kernel_dimension"] = dim;
    out["passed"] = t.ok() && dim == 1;
    passed = passed && t.ok() && dim == 1;
  } else if (name == "affine") {
    SuiteTally t;
    for (int i = 0; i < trials; ++i) {
      const Scene s = trial_scene(scene, rng);
      t.record(i, check_affine(s.lambda, s.k, trial_p14(scene, rng)));
    }
    out = t.to_json();
    passed = passed && t.ok();
  } else if (name == "weights") {
    Json lists = Json::object();
    bool ok = true;
    for (const auto& [rhs, expected] : {std::pair{-1, 2}, std::pair{-2, 6}}) {
      Json sols = Json::array();
      const auto found = weight_solutions(2, 2, rhs);
      for (const auto& w : found) sols.push_back(to_string(w));
      lists[std::to_string(rhs)] = {{"count", found.size()}, {"expected", expected}, {"solutions", sols}};
      ok = ok && static_cast<int>(found.size()) == expected;
    }
    out = {{"s", 2}, {"r", 2}, {"rhs", lists}, {"passed", ok}};
    passed = passed && ok;
  } else {
    throw InputError("unknown suite: " + name);
  }
  return out;
}

Json cmd_verify(const Options& opt, const std::optional<Scene>& scene, bool& passed) {
  const std::uint64_t seed = resolve_seed(opt, scene);
  if (opt.trials < 1) throw InputError("--trials must be positive");
  Json j = header("verify", seed, scene);
  j["suite"] = opt.suite;
  j["trials"] = opt.trials;
  Json results = Json::object();
  passed = true;
  if (opt.suite == "all") {
    for (const auto& s : kSuites) results[s] = run_suite(s, scene, opt.trials, seed, passed);
  } else {
    results[opt.suite] = run_suite(opt.suite, scene, opt.trials, seed, passed);
  }
  j["results"] = results;
  j["passed"] = passed;
  return j;
}

Json cmd_curvature(const Options& opt, const Scene& s) {
  Json j = header("curvature", resolve_seed(opt, s), s);
  const auto split = torsion_split(s.lambda);
  Json r = {{"torsion", to_json(split.torsion)},
            {"torsion_trace", to_json(torsion_trace(split.torsion))},
            {"curvature_k", to_json(curvature_K(s.k))},
            {"curvature_lambda", to_json(curvature_Lambda(split.sym))}};
  if (s.derivatives > 0) {
    const auto jets = curvature_jets(s.k, split.sym, s.derivatives);
    Json nk = Json::array();
    Json nl = Json::array();
    for (int i = 1; i <= s.derivatives; ++i) {
      nk.push_back(to_json(jets.k[static_cast<std::size_t>(i)]));
      nl.push_back(to_json(jets.lambda[static_cast<std::size_t>(i)]));
    }
    r["nabla_curvature_k"] = nk;
    r["nabla_curvature_lambda"] = nl;
  }
  Json at = Json::object();
  for (const auto& key : {"torsion", "curvature_k", "curvature_lambda"}) {
    const TensorField& t = std::string(key) == "torsion"       ? split.torsion
                           : std::string(key) == "curvature_k" ? curvature_K(s.k)
                                                               : curvature_Lambda(split.sym);
    Json vals = Json::array();
    for (const auto& v : evaluate(t, s.point)) vals.push_back(to_string(v));
    at[key] = vals;
  }
  r["at_point"] = at;
  j["results"] = r;
  j["passed"] = true;
  return j;
}

Json cmd_induce(const Options& opt, const Scene& s) {
  Json j = header("induce", resolve_seed(opt, s), s);
  j["target"] = opt.target;
  TensorField coeffs;
  if (opt.target == "d") {
    coeffs = induce_D(s.lambda, s.k).coeffs;
  } else if (opt.target == "gamma") {
    coeffs = induce_Gamma(s.lambda, s.k).coeffs;
  } else if (opt.target == "d-tilde") {
    if (!s.params15) throw InputError("target d-tilde needs params15 in the scene");
    coeffs = induce_D_tilde(s.lambda, s.k, *s.params15).coeffs;
    j["params15"] = to_json(*s.params15);
  } else if (opt.target == "gamma-tilde") {
    if (!s.params14) throw InputError("target gamma-tilde needs params14 in the scene");
    coeffs = induce_Gamma_tilde(s.lambda, s.k, *s.params14).coeffs;
    j["params14"] = to_json(*s.params14);
  } else {
    throw InputError("--target must be one of d, d-tilde, gamma, gamma-tilde");
  }
  j["results"] = {{"connection", to_json(coeffs)}};
  j["passed"] = true;
  return j;
}

Json cmd_weights(const Options& opt, bool& passed) {
  Json j = header("weights", resolve_seed(opt, std::nullopt), std::nullopt);
  passed = true;
  j["results"] = run_suite("weights", std::nullopt, 1, 0, passed);
  j["passed"] = passed;
  return j;
}

void emit(const Json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw InputError("cannot write output file: " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural connections induced on vector bundles and their jet prolongations"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options opt;
  std::string seed_text;
  app.add_option("--scene", opt.scene_path, "Scene JSON file");
  app.add_option("--target", opt.target, "induce target")->check(CLI::IsMember({"d", "d-tilde", "gamma", "gamma-tilde"}));
  std::vector<std::string> suites = kSuites;
  suites.push_back("all");
  app.add_option("--suite", opt.suite, "verify suite")->check(CLI::IsMember(suites));
  app.add_option("--trials", opt.trials, "Random trials per suite");
  app.add_option("--seed", seed_text, "Seed (falls back to BUNDLECONN_SEED)");
  app.add_option("--out", opt.out, "Write the report here instead of stdout");
  auto* curvature = app.add_subcommand("curvature", "Torsion, curvatures and their covariant differentials");
  auto* induce = app.add_subcommand("induce", "Coefficient table of an induced connection");
  auto* verify = app.add_subcommand("verify", "Run verification suites");
  auto* weights = app.add_subcommand("weights", "Solutions of the weight equation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    if (!seed_text.empty()) opt.seed = parse_seed(seed_text);
    std::optional<Scene> scene;
    if (!opt.scene_path.empty()) scene = load_scene(opt.scene_path);
    bool passed = true;
    Json report;
    if (*curvature) {
      if (!scene) throw InputError("curvature needs --scene");
      report = cmd_curvature(opt, *scene);
    } else if (*induce) {
      if (!scene) throw InputError("induce needs --scene");
      if (opt.target.empty()) throw InputError("induce needs --target");
      report = cmd_induce(opt, *scene);
    } else if (*verify) {
      report = cmd_verify(opt, scene, passed);
    } else if (*weights) {
      report = cmd_weights(opt, passed);
    }
    emit(report, opt.out);
    return passed ? kExitPass : kExitFail;
  } catch (const OrderError& e) {
    std::cerr << "insufficient order: " << e.what() << "\n";
    return kExitOrder;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}
