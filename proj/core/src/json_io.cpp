#include "equivar/json_io.hpp"

#include <stdexcept>
#include <string>

namespace equivar {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("json: " + what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) fail(std::string(what) + " must be a number");
  return j.get<double>();
}

int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) fail(std::string(what) + " must be an integer");
  return j.get<int>();
}

std::vector<Word> relators_from(const Json& j, const Presentation& pres) {
  std::vector<Word> out;
  if (!j.is_array()) fail("relators must be an array");
  for (const Json& r : j) {
    if (!r.is_string()) fail("relator must be a string");
    out.push_back(parse_word(r.get<std::string>(), pres));
  }
  return out;
}

Presentation presentation_from(const Json& j) {
  Presentation p;
  const Json& gens = field(j, "generators");
  if (!gens.is_array()) fail("generators must be an array");
  for (const Json& g : gens) {
    if (!g.is_string() || g.get<std::string>().empty()) fail("generator names must be non-empty strings");
    p.generators.push_back(g.get<std::string>());
  }
  if (j.contains("relators")) p.relators = relators_from(j.at("relators"), p);
  return p;
}

Json presentation_to(const Presentation& p) {
  Json rel = Json::array();
  for (const Word& w : p.relators) rel.push_back(format_word(w, p));
  return {{"generators", p.generators}, {"relators", rel}};
}

std::vector<AlgElem> matrices_from(const Json& j, const char* what) {
  if (!j.is_array()) fail(std::string(what) + " must be an array");
  std::vector<AlgElem> out;
  for (const Json& m : j) out.push_back(matrix_from_json(m));
  return out;
}

Json matrices_to(const std::vector<Mat>& ms) {
  Json out = Json::array();
  for (const Mat& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  const bool real = m.imag().cwiseAbs().maxCoeff() == 0.0;
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) {
      if (real) {
        row.push_back(m(i, k).real());
      } else {
        row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) fail("matrix must be a non-empty array of rows");
  const int n = static_cast<int>(j.size());
  int cols = -1;
  Mat m;
  for (int i = 0; i < n; ++i) {
    const Json& row = j[i];
    if (!row.is_array()) fail("matrix row must be an array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      if (cols == 0) fail("matrix row is empty");
      m.resize(n, cols);
    } else if (static_cast<int>(row.size()) != cols) {
      fail("matrix rows differ in length");
    }
    for (int k = 0; k < cols; ++k) {
      const Json& e = row[k];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        fail("matrix entry must be a number or an [re, im] pair");
      }
    }
  }
  return m;
}

Json mesh_to_json(const CoverMesh& mesh) {
  Json j = presentation_to(mesh.presentation);
  j["kind"] = mesh.kind;
  j["dimension"] = mesh.dimension;
  j["size_params"] = mesh.size_params;
  j["h"] = mesh.h;
  Json vs = Json::array();
  for (const MeshVertex& v : mesh.vertices) vs.push_back({{"w0", v.w0}, {"x", v.x}, {"y", v.y}});
  Json es = Json::array();
  for (const MeshEdge& e : mesh.edges) {
    es.push_back({{"u", e.u}, {"v", e.v}, {"label", format_word(e.label, mesh.presentation)}, {"w1", e.w1}});
  }
  Json fs = Json::array();
  for (const MeshFace& f : mesh.faces) {
    Json b = Json::array();
    for (const FaceSide& s : f.boundary) b.push_back(Json::array({s.edge, s.forward ? 1 : -1}));
    fs.push_back({{"boundary", b}, {"area", f.area}});
  }
  j["vertices"] = vs;
  j["edges"] = es;
  j["faces"] = fs;
  return j;
}

CoverMesh mesh_from_json(const Json& j) {
  CoverMesh mesh;
  mesh.presentation = presentation_from(j);
  mesh.kind = j.value("kind", std::string("custom"));
  mesh.dimension = j.contains("dimension") ? integer(j.at("dimension"), "dimension") : 2;
  if (j.contains("size_params")) mesh.size_params = j.at("size_params").get<std::vector<int>>();
  mesh.h = j.contains("h") ? number(j.at("h"), "h") : 0.0;
  const Json& vs = field(j, "vertices");
  if (!vs.is_array() || vs.empty()) fail("vertices must be a non-empty array");
  for (const Json& v : vs) {
    MeshVertex mv;
    mv.w0 = number(field(v, "w0"), "w0");
    mv.x = v.contains("x") ? number(v.at("x"), "x") : 0.0;
    mv.y = v.contains("y") ? number(v.at("y"), "y") : 0.0;
    mesh.vertices.push_back(mv);
  }
  const Json& es = field(j, "edges");
  if (!es.is_array()) fail("edges must be an array");
  for (const Json& e : es) {
    MeshEdge me;
    me.u = integer(field(e, "u"), "u");
    me.v = integer(field(e, "v"), "v");
    const Json& label = field(e, "label");
    if (!label.is_string()) fail("edge label must be a string");
    me.label = parse_word(label.get<std::string>(), mesh.presentation);
    me.w1 = number(field(e, "w1"), "w1");
    mesh.edges.push_back(me);
  }
  if (j.contains("faces")) {
    for (const Json& f : j.at("faces")) {
      MeshFace mf;
      const Json& b = field(f, "boundary");
      if (!b.is_array()) fail("face boundary must be an array");
      for (const Json& s : b) {
        if (!s.is_array() || s.size() != 2) fail("face side must be [edge, +-1]");
        const int dir = integer(s[1], "face side direction");
        if (dir != 1 && dir != -1) fail("face side direction must be +-1");
        mf.boundary.push_back({integer(s[0], "face side edge"), dir == 1});
      }
      mf.area = number(field(f, "area"), "area");
      mesh.faces.push_back(mf);
    }
  }
  mesh.validate();
  return mesh;
}

Json rep_to_json(const Representation& rho) {
  Json j = presentation_to(rho.presentation);
  j["group"] = to_string(rho.algebra.kind());
  j["n"] = rho.algebra.n();
  j["images"] = matrices_to(rho.images);
  return j;
}

Representation rep_from_json(const Json& j) {
  const Json& g = field(j, "group");
  if (!g.is_string()) fail("group must be a string");
  const GroupKind kind = group_kind_from_string(g.get<std::string>());
  const int n = kind == GroupKind::GL1_C ? 1 : integer(field(j, "n"), "n");
  if (n < 1) fail("n must be positive");
  Representation rho;
  rho.algebra = Algebra(kind, n);
  rho.presentation = presentation_from(j);
  rho.images = matrices_from(field(j, "images"), "images");
  for (const Mat& m : rho.images) {
    if (m.rows() != n || m.cols() != n) fail("image has the wrong size");
  }
  if (rho.images.size() != rho.presentation.generators.size()) fail("one image per generator is required");
  return rho;
}

Json cocycle_to_json(const Cocycle& c) { return {{"values", matrices_to(c.values)}}; }

Cocycle cocycle_from_json(const Json& j, const Representation& rho) {
  Cocycle c{matrices_from(field(j, "values"), "cocycle values")};
  if (c.values.size() != rho.images.size()) fail("one cocycle value per generator is required");
  for (const Mat& m : c.values) {
    if (m.rows() != rho.algebra.n() || m.cols() != rho.algebra.n()) fail("cocycle value has the wrong size");
  }
  return c;
}

Json jet_to_json(const Jet2Cocycle& ck) { return {{"c", matrices_to(ck.c.values)}, {"k", matrices_to(ck.k)}}; }

Jet2Cocycle jet_from_json(const Json& j, const Representation& rho) {
  Jet2Cocycle ck;
  ck.c = cocycle_from_json(Json{{"values", field(j, "c")}}, rho);
  ck.k = cocycle_from_json(Json{{"values", field(j, "k")}}, rho).values;
  return ck;
}

Json map_to_json(const EquivariantMap& f) { return {{"values", matrices_to(f.values)}}; }

EquivariantMap map_from_json(const Json& j) {
  return EquivariantMap{matrices_from(field(j, "values"), "map values")};
}

Json cochain_to_json(const TwistedCochain& x) {
  return {{"degree", x.degree}, {"values", matrices_to(x.values)}};
}

TwistedCochain cochain_from_json(const Json& j) {
  TwistedCochain x;
  x.degree = integer(field(j, "degree"), "degree");
  if (x.degree < 0 || x.degree > 2) fail("degree must be 0, 1 or 2");
  x.values = matrices_from(field(j, "values"), "cochain values");
  return x;
}

Json to_json(const ValidationReport& r) {
  return {{"ok", r.ok()},
          {"tol", r.tol},
          {"element_ok", r.element_ok},
          {"rep_ok", r.rep_ok},
          {"cocycle_ok", r.cocycle_ok},
          {"jet_ok", r.jet_ok},
          {"rep_residuals", r.rep_residuals},
          {"cocycle_residuals", r.cocycle_residuals},
          {"jet_residuals", r.jet_residuals},
          {"message", r.message}};
}

Json to_json(const FlowReport& r, bool with_history) {
  Json j = {{"energy", r.energy},
            {"tension_norm", r.tension_norm},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"drift", r.drift},
            {"reductive_suspected", r.reductive_suspected},
            {"reductive_heuristic", true},
            {"step_underflow", r.step_underflow},
            {"max_energy_increase", r.max_energy_increase}};
  if (with_history) j["energy_history"] = r.energy_history;
  return j;
}

Json to_json(const ObstructionResult& r) {
  return {{"orthogonal", r.orthogonal},
          {"defect", r.defect},
          {"threshold", r.threshold},
          {"omega_norm2", r.omega_norm2},
          {"h_dim", r.h_dim},
          {"witness", cochain_to_json(r.witness)}};
}

Json to_json(const FdEstimate& r) {
  return {{"steps", r.steps},
          {"d1", r.d1},
          {"d2", r.d2},
          {"d1_richardson", r.d1_richardson},
          {"d2_richardson", r.d2_richardson},
          {"e0", r.e0},
          {"all_converged", r.all_converged}};
}

Json to_json(const VariationReport& r) {
  return {{"first_analytic", r.first_analytic},
          {"second_analytic", r.second_analytic},
          {"fd", to_json(r.fd)},
          {"first_rel_error", r.first_rel_error},
          {"second_rel_error", r.second_rel_error},
          {"first_abs_error", r.first_abs_error},
          {"second_abs_error", r.second_abs_error},
          {"psi_d_residual", r.psi_d_residual},
          {"psi_codiff_residual", r.psi_codiff_residual},
          {"obstructed", r.obstructed}};
}

Json to_json(const PshResult& r) {
  return {{"defect", r.defect},
          {"omega_norm2", r.omega_norm2},
          {"relative_defect", r.omega_norm2 > 0.0 ? r.defect / r.omega_norm2 : 0.0},
          {"second_c", r.second_c},
          {"second_ic", r.second_ic},
          {"companion_gap", r.companion_gap}};
}

}  // namespace equivar
