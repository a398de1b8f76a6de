#include "lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace equivar::lab {

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kTasks = {"flow",          "energy", "hodge", "deform1",      "deform2",
                                         "variation",     "psh",    "critical-scan", "refine-study"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row_strings(header); }
  template <typename... T>
  void row(const T&... cells) {
    std::vector<std::string> v{cell(cells)...};
    row_strings(v);
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  void row_strings(const std::vector<std::string>& v) {
    for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << "\n";
  }
  std::ostringstream out_;
};

std::string summary_csv(const Json& results) {
  Csv csv({"quantity", "value"});
  for (auto it = results.begin(); it != results.end(); ++it) {
    if (it.value().is_number()) csv.row(it.key(), it.value().get<double>());
    if (it.value().is_boolean()) csv.row(it.key(), it.value().get<bool>() ? 1 : 0);
  }
  return csv.str();
}

// ---- config access -------------------------------------------------------

const Json& object_or_empty(const Json& j, const char* key) {
  static const Json empty = Json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ValidationError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

double get_positive(const Json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("'") + key + "' must be positive");
  return v;
}

int get_int(const Json& j, const char* key, int def, int min_value) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number_integer()) throw ValidationError(std::string("'") + key + "' must be an integer");
  const int v = j.at(key).get<int>();
  if (v < min_value) throw ValidationError(std::string("'") + key + "' is too small");
  return v;
}

std::string get_string(const Json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

cplx parse_cplx(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ValidationError("complex parameter must be a number or [re, im]");
}

std::vector<cplx> parse_cplx_list(const Json& params, const char* key, std::vector<cplx> defaults, int count) {
  std::vector<cplx> out;
  if (params.contains(key)) {
    const Json& a = params.at(key);
    if (!a.is_array()) throw ValidationError(std::string("'") + key + "' must be an array");
    for (const Json& x : a) out.push_back(parse_cplx(x));
  } else {
    if (static_cast<int>(defaults.size()) < count) {
      throw ValidationError(std::string("'") + key + "' is required for this presentation");
    }
    out.assign(defaults.begin(), defaults.begin() + count);
  }
  if (static_cast<int>(out.size()) != count) {
    throw ValidationError(std::string("'") + key + "' needs one entry per generator");
  }
  return out;
}

Json cplx_json(cplx z) { return Json::array({z.real(), z.imag()}); }

// ---- meshes --------------------------------------------------------------

CoverMesh build_mesh(const std::string& kind, const std::vector<int>& size) {
  auto need = [&](size_t n) {
    if (size.size() != n) throw ValidationError("mesh '" + kind + "' needs " + std::to_string(n) + " size values");
    for (int s : size) {
      if (s < 1) throw ValidationError("mesh sizes must be positive");
    }
  };
  if (kind == "circle") {
    need(1);
    if (size[0] < 3) throw ValidationError("circle needs at least 3 vertices");
    return build_circle(size[0]);
  }
  if (kind == "torus") {
    need(2);
    if (size[0] < 3 || size[1] < 3) throw ValidationError("torus needs at least 3 cells per side");
    return build_torus(size[0], size[1]);
  }
  if (kind == "genus2") {
    need(1);
    if (size[0] > 4) throw ValidationError("genus2 refinement level must be at most 4");
    return build_genus2(size[0]);
  }
  throw ValidationError("unknown mesh kind '" + kind + "'");
}

std::vector<int> parse_size(const Json& j) {
  if (j.is_number_integer()) return {j.get<int>()};
  if (!j.is_array()) throw ValidationError("mesh size must be an integer or an array of integers");
  std::vector<int> out;
  for (const Json& x : j) {
    if (!x.is_number_integer()) throw ValidationError("mesh size entries must be integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::vector<int> default_size(const std::string& kind) {
  if (kind == "circle") return {8};
  if (kind == "torus") return {6, 6};
  if (kind == "genus2") return {1};
  return {};
}

// ---- representations -----------------------------------------------------

struct RepSource {
  Representation rho;
  std::optional<std::vector<AlgElem>> logs;  // commuting logarithms, when known
};

Mat diag2(cplx z) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = z;
  m(1, 1) = -z;
  return m;
}

RepSource from_logs(const Algebra& alg, const Presentation& pres, std::vector<AlgElem> logs) {
  RepSource s;
  s.rho.algebra = alg;
  s.rho.presentation = pres;
  for (const AlgElem& L : logs) s.rho.images.push_back(expm(L));
  s.logs = std::move(logs);
  return s;
}

// Fills defaults into node so the resolved config is complete.
RepSource resolve_rep(Json& node, const Presentation& pres) {
  if (!node.is_object()) throw ValidationError("'representation' must be an object");
  const int ng = static_cast<int>(pres.generators.size());
  if (node.contains("inline")) {
    Json j = node.at("inline");
    if (!j.is_object()) throw ValidationError("'representation.inline' must be an object");
    if (!j.contains("generators")) j["generators"] = pres.generators;
    RepSource s;
    s.rho = rep_from_json(j);
    if (s.rho.presentation.generators != pres.generators) {
      throw ValidationError("representation generators do not match the mesh");
    }
    if (!j.contains("relators")) s.rho.presentation.relators = pres.relators;
    if (j.contains("logs")) {
      std::vector<AlgElem> logs;
      for (const Json& m : j.at("logs")) logs.push_back(matrix_from_json(m));
      s.logs = logs;
    }
    return s;
  }
  const std::string family = get_string(node, "family", "");
  if (family.empty()) throw ValidationError("representation needs 'family' or 'inline'");
  if (!node.contains("params")) node["params"] = Json::object();
  Json& params = node["params"];
  if (!params.is_object()) throw ValidationError("'representation.params' must be an object");

  if (family == "trivial") {
    const std::string g = get_string(params, "group", "SL_R");
    GroupKind kind;
    try {
      kind = group_kind_from_string(g);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    const int n = kind == GroupKind::GL1_C ? 1 : get_int(params, "n", 2, 2);
    params["group"] = g;
    params["n"] = n;
    const Algebra alg(kind, n);
    return from_logs(alg, pres, std::vector<AlgElem>(ng, alg.zero()));
  }
  if (family == "hyperbolic" || family == "parabolic") {
    const Algebra alg = Algebra::sl_real(2);
    std::vector<AlgElem> logs(ng, alg.zero());
    if (family == "hyperbolic") {
      const double lambda = get_positive(params, "lambda", 2.0);
      params["lambda"] = lambda;
      logs[0] = diag2(std::log(lambda));
    } else {
      if (params.contains("shear") && !params.at("shear").is_number()) throw ValidationError("'shear' must be a number");
      const double s = params.value("shear", 1.0);
      params["shear"] = s;
      logs[0](0, 1) = s;
    }
    return from_logs(alg, pres, logs);
  }
  if (family == "diagonal" || family == "cstar") {
    const bool cstar = family == "cstar";
    const std::vector<cplx> z = parse_cplx_list(
        params, "z", cstar ? std::vector<cplx>{{0.4, 0.3}, {-0.2, 0.5}} : std::vector<cplx>{{0.3, 0.2}, {0.1, -0.4}}, ng);
    Json zs = Json::array();
    for (cplx v : z) zs.push_back(cplx_json(v));
    params["z"] = zs;
    const Algebra alg = cstar ? Algebra::gl1_complex() : Algebra::sl_complex(2);
    std::vector<AlgElem> logs;
    for (cplx v : z) logs.push_back(cstar ? Mat::Constant(1, 1, v) : diag2(v));
    return from_logs(alg, pres, logs);
  }
  if (family == "unitary") {
    std::vector<cplx> th = parse_cplx_list(params, "theta", {{0.7, 0.0}, {-1.1, 0.0}}, ng);
    Json ts = Json::array();
    std::vector<AlgElem> logs;
    for (cplx t : th) {
      if (t.imag() != 0.0) throw ValidationError("'theta' entries must be real");
      ts.push_back(t.real());
      Mat L = Mat::Zero(2, 2);
      L(0, 1) = -t.real();
      L(1, 0) = t.real();
      logs.push_back(L);
    }
    params["theta"] = ts;
    const std::string g = get_string(params, "group", "SL_R");
    if (g != "SL_R" && g != "SL_C") throw ValidationError("unitary family needs group SL_R or SL_C");
    params["group"] = g;
    return from_logs(g == "SL_R" ? Algebra::sl_real(2) : Algebra::sl_complex(2), pres, logs);
  }
  if (family == "fuchsian") {
    const std::string g = get_string(params, "group", "SL_R");
    if (g != "SL_R" && g != "SL_C") throw ValidationError("fuchsian family needs group SL_R or SL_C");
    params["group"] = g;
    RepSource s;
    s.rho = fuchsian_genus2(group_kind_from_string(g));
    if (s.rho.presentation.generators != pres.generators) {
      throw ValidationError("fuchsian family needs the genus2 mesh");
    }
    return s;
  }
  throw ValidationError("unknown representation family '" + family + "'");
}

// ---- experiment ----------------------------------------------------------

struct Experiment {
  std::string task;
  Json resolved;
  std::string mesh_kind;
  CoverMesh mesh;
  RepSource src;
  FlowParams flow;
  int restarts = 2;
  std::string start = "constant";
  unsigned long long seed = 1;
  double validation_tol = 1e-8;
};

Experiment resolve(const std::string& task, const Json& config, const Overrides& ov) {
  if (!config.is_object()) throw ValidationError("config must be a JSON object");
  Experiment ex;
  ex.task = task;
  ex.resolved = config;
  Json& r = ex.resolved;
  r["task"] = task;

  if (config.contains("seed")) {
    if (!config.at("seed").is_number_unsigned()) throw ValidationError("'seed' must be a non-negative integer");
    ex.seed = config.at("seed").get<unsigned long long>();
  }
  if (ov.seed) ex.seed = *ov.seed;
  r["seed"] = ex.seed;

  const Json& tol = object_or_empty(config, "tolerances");
  ex.flow.tol = get_positive(tol, "flow", 1e-8);
  if (ov.tol) {
    if (!(*ov.tol > 0.0)) throw ValidationError("--tol must be positive");
    ex.flow.tol = *ov.tol;
  }
  ex.validation_tol = get_positive(tol, "validation", 1e-8);
  r["tolerances"] = {{"flow", ex.flow.tol}, {"validation", ex.validation_tol}};

  const Json& fl = object_or_empty(config, "flow");
  ex.flow.max_iter = get_int(fl, "max_iter", 5000, 1);
  ex.flow.radius = get_positive(fl, "radius", 50.0);
  ex.restarts = get_int(fl, "restarts", 2, 0);
  ex.start = get_string(fl, "start", "constant");
  if (ex.start != "constant" && ex.start != "random") throw ValidationError("'flow.start' must be constant or random");
  r["flow"] = {{"max_iter", ex.flow.max_iter}, {"radius", ex.flow.radius}, {"restarts", ex.restarts},
               {"start", ex.start}};

  if (!config.contains("mesh") || !config.at("mesh").is_object()) throw ValidationError("'mesh' object is required");
  Json& mesh = r["mesh"];
  ex.mesh_kind = get_string(mesh, "kind", "");
  if (ex.mesh_kind == "custom") {
    if (!mesh.contains("inline")) throw ValidationError("custom mesh needs 'inline'");
    ex.mesh = mesh_from_json(mesh.at("inline"));
  } else {
    const std::vector<int> size = mesh.contains("size") ? parse_size(mesh.at("size")) : default_size(ex.mesh_kind);
    mesh["size"] = size;
    ex.mesh = build_mesh(ex.mesh_kind, size);
  }

  if (!config.contains("representation")) throw ValidationError("'representation' is required");
  ex.src = resolve_rep(r["representation"], ex.mesh.presentation);
  const ValidationReport vr = validate(ex.src.rho, ex.validation_tol);
  if (!vr.ok()) throw ValidationError("representation does not validate: " + vr.message);
  return ex;
}

RepPath resolve_path(const Experiment& ex, const Json& node) {
  if (!node.is_object()) throw ValidationError("'path' must be an object");
  const std::string kind = get_string(node, "kind", "");
  const Representation& rho = ex.src.rho;
  if (kind == "abelian") {
    if (!node.contains("directions")) throw ValidationError("abelian path needs 'directions'");
    std::vector<AlgElem> dirs;
    for (const Json& m : node.at("directions")) dirs.push_back(matrix_from_json(m));
    std::vector<AlgElem> logs;
    if (node.contains("logs")) {
      for (const Json& m : node.at("logs")) logs.push_back(matrix_from_json(m));
    } else if (ex.src.logs) {
      logs = *ex.src.logs;
    } else {
      throw ValidationError("abelian path needs 'logs' for this representation");
    }
    for (const AlgElem& d : dirs) rho.algebra.check_element(d, 1e-10);
    RepPath p = abelian_path(rho.algebra, rho.presentation, logs, dirs);
    const Representation base = p.base();
    double gap = 0.0;
    for (size_t i = 0; i < base.images.size(); ++i) gap = std::max(gap, (base.images[i] - rho.images[i]).norm());
    if (gap > 1e-8) throw ValidationError("abelian path logs do not reproduce the representation");
    return p;
  }
  if (kind == "conjugation") {
    if (!node.contains("xi")) throw ValidationError("conjugation path needs 'xi'");
    const AlgElem xi = matrix_from_json(node.at("xi"));
    rho.algebra.check_element(xi, 1e-10);
    return conjugation_path(rho, xi);
  }
  if (kind == "bending") {
    const cplx z = node.contains("z") ? parse_cplx(node.at("z")) : cplx(0.0, 1.0);
    return bending_path(rho, z);
  }
  throw ValidationError("unknown path kind '" + kind + "'");
}

Cocycle resolve_cocycle(const Experiment& ex, const Json& config) {
  Cocycle c;
  if (config.contains("cocycle")) {
    c = cocycle_from_json(config.at("cocycle"), ex.src.rho);
  } else if (config.contains("jet")) {
    c = jet_from_json(config.at("jet"), ex.src.rho).c;
  } else if (config.contains("path")) {
    c = path_jets(resolve_path(ex, config.at("path"))).c;
  } else {
    throw ValidationError("task needs 'cocycle', 'jet' or 'path'");
  }
  const ValidationReport vr = validate(ex.src.rho, c, ex.validation_tol);
  if (!vr.ok()) throw ValidationError("cocycle does not validate: " + vr.message);
  return c;
}

Jet2Cocycle resolve_jet(const Experiment& ex, const Json& config) {
  Jet2Cocycle ck;
  if (config.contains("jet")) {
    ck = jet_from_json(config.at("jet"), ex.src.rho);
  } else if (config.contains("path")) {
    ck = path_jets(resolve_path(ex, config.at("path")));
  } else {
    throw ValidationError("task needs 'jet' or 'path'");
  }
  const ValidationReport vr = validate(ex.src.rho, ck, ex.validation_tol);
  if (!vr.ok()) throw ValidationError("second-order jet does not validate: " + vr.message);
  return ck;
}

EquivariantMap start_map(const Experiment& ex, const CoverMesh& mesh, const Representation& rho) {
  if (ex.start == "random") return random_map(mesh, rho.algebra, ex.seed);
  return constant_map(mesh, rho.algebra.n());
}

// Harmonic map for the downstream pipelines; non-convergence is fatal.
FlowResult harmonic_map(const Experiment& ex, Json& results) {
  FlowResult fr = flow(ex.mesh, ex.src.rho, start_map(ex, ex.mesh, ex.src.rho), ex.flow);
  results["flow"] = to_json(fr.report);
  if (!fr.report.converged) {
    throw ConvergenceError("harmonic map flow did not converge (tension " + fmt(fr.report.tension_norm) + ")");
  }
  return fr;
}

Vec random_vec(int size, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(size);
  for (int i = 0; i < size; ++i) v[i] = nd(rng);
  return v;
}

// ---- tasks ---------------------------------------------------------------

int flow_exit(const FlowReport& r) {
  if (r.converged) return kOk;
  // A plateau with drifting basepoint is the expected outcome for a
  // non-reductive representation, not a solver failure.
  return r.reductive_suspected ? kNonConvergence : kOk;
}

int task_flow(const Experiment& ex, RunResult& out) {
  const FlowResult fr = flow(ex.mesh, ex.src.rho, start_map(ex, ex.mesh, ex.src.rho), ex.flow);
  Json& res = out.report["results"];
  res = to_json(fr.report);
  Csv hist({"iteration", "energy"});
  for (size_t i = 0; i < fr.report.energy_history.size(); ++i) hist.row(static_cast<int>(i), fr.report.energy_history[i]);
  out.artifacts["energy_history.csv"] = hist.str();
  out.artifacts["map.json"] = map_to_json(fr.map).dump(2) + "\n";
  if (!fr.report.converged && !fr.report.reductive_suspected) {
    out.diagnostics.push_back("flow plateaued with drifting basepoint; representation looks non-reductive");
  }
  return flow_exit(fr.report);
}

int task_energy(const Experiment& ex, RunResult& out) {
  const RepEnergy e = energy_of_rep(ex.mesh, ex.src.rho, ex.flow, ex.restarts, ex.seed);
  Json& res = out.report["results"];
  res["energy"] = e.energy;
  res["reductive_suspected"] = e.reductive_suspected;
  res["best_flow"] = to_json(e.best.report);
  return flow_exit(e.best.report);
}

int task_hodge(const Experiment& ex, RunResult& out) {
  Json& res = out.report["results"];
  const FlowResult fr = harmonic_map(ex, res);
  const TwistedComplex cx(ex.mesh, ex.src.rho, fr.map);
  std::mt19937_64 rng(ex.seed);
  const TwistedCochain F = cx.from_vec(0, random_vec(cx.size(0), rng));
  const TwistedCochain a = cx.from_vec(1, random_vec(cx.size(1), rng));
  const TwistedCochain s = cx.from_vec(2, random_vec(cx.size(2), rng));
  res["dd_max_entry"] = ex.mesh.num_faces() > 0 ? (cx.d_matrix(1) * cx.d_matrix(0)).cwiseAbs().maxCoeff() : 0.0;
  res["dd_relative"] = ex.mesh.num_faces() > 0 ? cx.norm(cx.d(cx.d(F))) / cx.norm(F) : 0.0;
  res["adjunction0"] = std::abs(cx.inner(cx.d(F), a) - cx.inner(F, cx.codiff(a))) / (cx.norm(F) * cx.norm(a));
  res["adjunction1"] = ex.mesh.num_faces() > 0
                           ? std::abs(cx.inner(cx.d(a), s) - cx.inner(a, cx.codiff(s))) / (cx.norm(a) * cx.norm(s))
                           : 0.0;
  const HodgeDecomposition hd = hodge_decompose(cx, a);
  res["hodge_reconstruction"] = hd.reconstruction_error;
  res["hodge_max_cross_inner"] = hd.max_cross_inner;
  res["hodge_harmonic_laplacian"] = hd.harmonic_laplacian_residual;
  res["kernel_dim"] = cx.kernel_dim();
  res["kernel_split_residual"] = kernel_split_residual(cx);
  res["kernel_cutoff"] = cx.kernel_cutoff();
  if (ex.mesh.dimension == 2) res["maurer_cartan_residual"] = maurer_cartan_residual(ex.mesh, ex.src.rho, fr.map);
  out.artifacts["spectrum.csv"] = spectrum_csv(cx);
  return kOk;
}

int task_deform1(const Experiment& ex, const Json& config, RunResult& out) {
  Json& res = out.report["results"];
  const Cocycle c = resolve_cocycle(ex, config);
  const FlowResult fr = harmonic_map(ex, res);
  const TwistedComplex cx(ex.mesh, ex.src.rho, fr.map);
  const FirstOrderDeformation d = first_order(cx, c);
  res["closed_residual"] = d.harmonic.closed_residual;
  res["coclosed_residual"] = d.harmonic.coclosed_residual;
  res["period_defect"] = d.primitive.period_defect;
  res["equivariance_residual"] = d.primitive.equivariance_residual;
  res["jacobi_residual"] = d.jacobi_residual;
  res["omega_norm"] = cx.norm(d.harmonic.omega);
  res["kernel_dim"] = cx.kernel_dim();
  // Second solution grown from a random start; the fibre is affine over ker J.
  std::mt19937_64 rng(ex.seed);
  const TwistedCochain start = cx.from_vec(0, random_vec(cx.size(0), rng));
  const FirstOrderDeformation d2 = first_order(cx, c, &start);
  const TwistedCochain diff = sub(d2.primitive.F, d.primitive.F);
  const double nd = cx.norm(diff);
  res["fiber_difference_norm"] = nd;
  res["fiber_off_kernel"] = nd > 0.0 ? cx.norm(sub(diff, cx.project_kernel(diff))) / nd : 0.0;
  Json art = {{"omega", cochain_to_json(d.harmonic.omega)},
              {"F", cochain_to_json(d.primitive.F)},
              {"v", cochain_to_json(d.v)}};
  out.artifacts["deformation.json"] = art.dump(2) + "\n";
  return kOk;
}

int task_deform2(const Experiment& ex, const Json& config, RunResult& out) {
  Json& res = out.report["results"];
  const Jet2Cocycle ck = resolve_jet(ex, config);
  const FlowResult fr = harmonic_map(ex, res);
  const TwistedComplex cx(ex.mesh, ex.src.rho, fr.map);
  try {
    const SecondOrderDeformation d = second_order(cx, ck);
    res["obstruction"] = to_json(d.obstruction);
    res["flatness"] = d.residuals.flatness;
    res["equivariance1"] = d.residuals.equivariance1;
    res["psi_d_residual"] = d.psi.d_residual;
    res["psi_codiff_residual"] = d.psi.codiff_residual;
    res["jacobi_residual"] = d.first.jacobi_residual;
    const bool psi_ok = d.psi.d_residual < 1e-7 && d.psi.codiff_residual < 1e-7;
    res["conditions"] = {{"defect_orthogonal", d.obstruction.orthogonal},
                         {"psi_exists", psi_ok},
                         {"agree", d.obstruction.orthogonal == psi_ok}};
    Json art = {{"omega", cochain_to_json(d.first.harmonic.omega)}, {"F", cochain_to_json(d.first.primitive.F)},
                {"F2", cochain_to_json(d.F2)},  {"psi", cochain_to_json(d.psi.psi)},
                {"v", cochain_to_json(d.v)},    {"w", cochain_to_json(d.w)}};
    out.artifacts["deformation.json"] = art.dump(2) + "\n";
    return kOk;
  } catch (const ObstructedError& e) {
    res["obstruction"] = to_json(e.result());
    const FirstOrderDeformation d1 = first_order(cx, ck.c);
    const PsiSolution psi = solve_psi_unchecked(cx, d1.harmonic.omega, d1.primitive.F, ck);
    res["psi_codiff_residual"] = psi.codiff_residual;
    res["conditions"] = {{"defect_orthogonal", false},
                         {"psi_exists", psi.codiff_residual < 1e-7},
                         {"agree", !(psi.codiff_residual < 1e-7)}};
    out.diagnostics.push_back("second-order deformation is obstructed (defect " + fmt(e.result().defect) + ")");
    return kObstructed;
  }
}

int task_variation(const Experiment& ex, const Json& config, RunResult& out) {
  Json& res = out.report["results"];
  if (!config.contains("path")) throw ValidationError("variation needs 'path'");
  const RepPath path = resolve_path(ex, config.at("path"));
  FdParams fd;
  fd.flow = ex.flow;
  VariationReport vr;
  try {
    vr = variation_report(ex.mesh, path, fd);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) throw;
    throw ConvergenceError(e.what());
  }
  res = to_json(vr);
  Csv csv({"step", "d1", "d2"});
  for (size_t i = 0; i < vr.fd.steps.size(); ++i) csv.row(vr.fd.steps[i], vr.fd.d1[i], vr.fd.d2[i]);
  csv.row(0.0, vr.fd.d1_richardson, vr.fd.d2_richardson);
  out.artifacts["fd.csv"] = csv.str();
  if (!vr.fd.all_converged) {
    out.diagnostics.push_back("some finite-difference flows did not converge");
    return kNonConvergence;
  }
  return kOk;
}

int task_psh(const Experiment& ex, const Json& config, RunResult& out) {
  Json& res = out.report["results"];
  if (!ex.src.rho.algebra.is_complex()) throw ValidationError("psh needs a complex group");
  const Jet2Cocycle ck = resolve_jet(ex, config);
  const FlowResult fr = harmonic_map(ex, res);
  const TwistedComplex cx(ex.mesh, ex.src.rho, fr.map);
  try {
    const PshResult p = psh_defect(cx, ck);
    res.update(to_json(p));
    return kOk;
  } catch (const ObstructedError& e) {
    res["obstruction"] = to_json(e.result());
    out.diagnostics.push_back("direction is obstructed (defect " + fmt(e.result().defect) + ")");
    return kObstructed;
  }
}

int task_critical_scan(const Experiment& ex, RunResult& out) {
  Json& res = out.report["results"];
  const FlowResult fr = harmonic_map(ex, res);
  const TwistedComplex cx(ex.mesh, ex.src.rho, fr.map);
  const std::vector<Cocycle> basis = cocycle_basis(ex.src.rho);
  const TwistedCochain beta = beta_cochain(cx);
  const double nb = std::sqrt(std::max(0.0, edge_inner(cx, beta, beta)));
  Csv csv({"direction", "omega_norm", "normalized_first_variation"});
  for (size_t i = 0; i < basis.size(); ++i) {
    const HarmonicForm h = harmonic_rep(cx, basis[i]);
    const double nw = std::sqrt(std::max(0.0, edge_inner(cx, h.omega, h.omega)));
    const double v = (nw > 0.0 && nb > 0.0) ? edge_inner(cx, h.omega, beta) / (nw * nb) : 0.0;
    csv.row(static_cast<int>(i), nw, v);
  }
  res["basis_size"] = static_cast<int>(basis.size());
  res["beta_norm"] = nb;
  res["critical_scan"] = critical_scan(cx, basis);
  out.artifacts["critical_scan.csv"] = csv.str();
  return kOk;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& v) {
  std::vector<double> x, y;
  for (size_t i = 0; i < h.size(); ++i) {
    if (v[i] > 0.0 && h[i] > 0.0) {
      x.push_back(std::log(h[i]));
      y.push_back(std::log(v[i]));
    }
  }
  if (x.size() < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

int task_refine(Experiment& ex, const Json& config, RunResult& out) {
  Json& res = out.report["results"];
  if (ex.mesh_kind == "custom") throw ValidationError("refine-study needs a built-in mesh kind");
  Json& refine = ex.resolved["refine"];
  if (!refine.is_object()) refine = Json::object();
  if (!refine.contains("levels")) {
    if (ex.mesh_kind == "circle") refine["levels"] = Json::array({8, 16, 32});
    if (ex.mesh_kind == "torus") refine["levels"] = Json::array({Json::array({4, 4}), Json::array({8, 8}), Json::array({16, 16})});
    if (ex.mesh_kind == "genus2") refine["levels"] = Json::array({1, 2, 3});
  }
  const Json& levels = refine.at("levels");
  if (!levels.is_array() || levels.size() < 3) throw ValidationError("refine-study needs at least 3 levels");
  const std::string map_kind = get_string(refine, "map", "harmonic");
  refine["map"] = map_kind;
  const bool periodic = map_kind == "periodic-test";
  if (!periodic && map_kind != "harmonic") throw ValidationError("'refine.map' must be harmonic or periodic-test");
  if (periodic) {
    if (ex.mesh_kind != "torus" || ex.src.rho.algebra.n() != 2) {
      throw ValidationError("periodic-test map needs a torus mesh and 2x2 matrices");
    }
    for (const GroupElem& g : ex.src.rho.images) {
      if ((g - ex.src.rho.algebra.identity()).norm() > 1e-12) {
        throw ValidationError("periodic-test map needs the trivial representation");
      }
    }
  }
  const bool closed_form = ex.mesh_kind == "circle" &&
                           ex.resolved["representation"].value("family", std::string()) == "hyperbolic";
  std::map<std::string, std::vector<double>> series;
  std::vector<double> hs;
  Csv csv({"level", "h", "quantity", "value"});
  bool all_converged = true;
  for (size_t li = 0; li < levels.size(); ++li) {
    const CoverMesh mesh = build_mesh(ex.mesh_kind, parse_size(levels[li]));
    Json rep_spec = ex.resolved["representation"];
    const RepSource src = resolve_rep(rep_spec, mesh.presentation);
    FlowResult fr;
    if (periodic) {
      fr.map = periodic_test_map(mesh);
      fr.report.energy = energy(mesh, src.rho, fr.map);
      fr.report.tension_norm = tension_norm(mesh, src.rho, fr.map);
    } else {
      fr = flow(mesh, src.rho, start_map(ex, mesh, src.rho), ex.flow);
      all_converged = all_converged && fr.report.converged;
    }
    std::map<std::string, double> q;
    q["energy"] = fr.report.energy;
    q["tension_norm"] = fr.report.tension_norm;
    if (mesh.dimension == 2) q["maurer_cartan_residual"] = maurer_cartan_residual(mesh, src.rho, fr.map);
    if (closed_form) {
      const double lambda = rep_spec["params"]["lambda"].get<double>();
      q["energy_error"] = std::abs(fr.report.energy - 4.0 * std::log(lambda) * std::log(lambda));
    }
    if (config.contains("cocycle")) {
      const TwistedComplex cx(mesh, src.rho, fr.map);
      const Cocycle c = cocycle_from_json(config.at("cocycle"), src.rho);
      const HarmonicForm h = harmonic_rep(cx, c);
      q["closed_residual"] = h.closed_residual;
      q["coclosed_residual"] = h.coclosed_residual;
    }
    hs.push_back(mesh.h);
    for (const auto& [name, value] : q) {
      series[name].push_back(value);
      csv.row(static_cast<int>(li), mesh.h, name, value);
    }
  }
  Json slopes = Json::object(), monotone = Json::object();
  for (const auto& [name, values] : series) {
    const double s = fit_slope(hs, values);
    slopes[name] = std::isnan(s) ? Json(nullptr) : Json(s);
    bool dec = true;
    for (size_t i = 1; i < values.size(); ++i) dec = dec && values[i] < values[i - 1];
    monotone[name] = dec;
  }
  res["h"] = hs;
  res["values"] = series;
  res["slopes"] = slopes;
  res["monotone_decreasing"] = monotone;
  res["all_converged"] = all_converged;
  out.artifacts["refine.csv"] = csv.str();
  if (!all_converged) {
    out.diagnostics.push_back("some refinement levels did not converge");
    return kNonConvergence;
  }
  return kOk;
}

Json base_report(const std::string& task) {
  return {{"schema_version", kSchemaVersion}, {"task", task}, {"config", nullptr}, {"results", Json::object()}};
}

}  // namespace

const std::vector<std::string>& task_names() { return kTasks; }

RunResult run(const std::string& task, const Json& config, const Overrides& overrides) {
  RunResult out;
  out.report = base_report(task);
  auto finish = [&](int code, const std::string& status) {
    out.exit_code = code;
    out.report["status"] = status;
    out.report["exit_code"] = code;
    out.report["diagnostics"] = out.diagnostics;
    Json& res = out.report["results"];
    if (res.is_object() && !res.empty()) out.artifacts["summary.csv"] = summary_csv(res);
    return out;
  };
  if (std::find(kTasks.begin(), kTasks.end(), task) == kTasks.end()) {
    out.diagnostics.push_back("unknown task '" + task + "'");
    return finish(kValidationFailure, "validation_failure");
  }
  try {
    Experiment ex = resolve(task, config, overrides);
    out.report["config"] = ex.resolved;
    int code = kOk;
    if (task == "flow") code = task_flow(ex, out);
    if (task == "energy") code = task_energy(ex, out);
    if (task == "hodge") code = task_hodge(ex, out);
    if (task == "deform1") code = task_deform1(ex, config, out);
    if (task == "deform2") code = task_deform2(ex, config, out);
    if (task == "variation") code = task_variation(ex, config, out);
    if (task == "psh") code = task_psh(ex, config, out);
    if (task == "critical-scan") code = task_critical_scan(ex, out);
    if (task == "refine-study") {
      code = task_refine(ex, config, out);
      out.report["config"] = ex.resolved;
    }
    const char* status = code == kOk ? "ok" : code == kObstructed ? "obstructed" : "non_convergence";
    return finish(code, status);
  } catch (const ConvergenceError& e) {
    out.diagnostics.push_back(e.what());
    return finish(kNonConvergence, "non_convergence");
  } catch (const ValidationError& e) {
    out.diagnostics.push_back(e.what());
  } catch (const std::invalid_argument& e) {
    out.diagnostics.push_back(e.what());
  } catch (const nlohmann::json::exception& e) {
    out.diagnostics.push_back(std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    out.diagnostics.push_back(std::string("error: ") + e.what());
  }
  return finish(kValidationFailure, "validation_failure");
}

int run_files(const std::string& task, const std::string& config_path, const std::string& out_dir,
              const Overrides& overrides, std::ostream& err) {
  RunResult result;
  std::ifstream in(config_path);
  if (!in) {
    err << "equivar-lab: cannot open config " << config_path << "\n";
    return kValidationFailure;
  }
  Json config;
  try {
    config = Json::parse(in);
    result = run(task, config, overrides);
  } catch (const nlohmann::json::parse_error& e) {
    result.report = base_report(task);
    result.exit_code = kValidationFailure;
    result.diagnostics.push_back(std::string("malformed config JSON: ") + e.what());
    result.report["status"] = "validation_failure";
    result.report["exit_code"] = result.exit_code;
    result.report["diagnostics"] = result.diagnostics;
  }
  for (const std::string& d : result.diagnostics) err << "equivar-lab: " << d << "\n";
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "equivar-lab: cannot create output directory " << out_dir << ": " << ec.message() << "\n";
    return kValidationFailure;
  }
  const std::filesystem::path dir(out_dir);
  std::ofstream(dir / "report.json") << result.report.dump(2) << "\n";
  for (const auto& [name, body] : result.artifacts) std::ofstream(dir / name) << body;
  return result.exit_code;
}

}  // namespace equivar::lab
