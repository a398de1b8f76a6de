#include "equivar/meshcover.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace equivar {

int Presentation::generator_index(const std::string& name) const {
  for (size_t i = 0; i < generators.size(); ++i) {
    if (generators[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Word parse_word(const std::string& text, const Presentation& pres) {
  Word w;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    int g = pres.generator_index(tok);
    if (g >= 0) {
      w.push_back({g, 1});
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(tok[0]))) {
      std::string lower = tok;
      lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lower[0])));
      g = pres.generator_index(lower);
      if (g >= 0) {
        w.push_back({g, -1});
        continue;
      }
    }
    throw std::invalid_argument("unknown generator in word: " + tok);
  }
  return w;
}

std::string format_word(const Word& w, const Presentation& pres) {
  std::string out;
  for (const Letter& l : w) {
    if (l.gen < 0 || l.gen >= static_cast<int>(pres.generators.size())) {
      throw std::invalid_argument("format_word: generator index out of range");
    }
    std::string tok = pres.generators[l.gen];
    if (l.exp < 0) tok[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

Word inverse(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (Letter& l : r) l.exp = -l.exp;
  return r;
}

Word concat(const Word& a, const Word& b) {
  Word r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Word free_reduce(const Word& w) {
  Word out;
  for (const Letter& l : w) {
    if (!out.empty() && out.back().gen == l.gen && out.back().exp == -l.exp) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  size_t i = 0;
  size_t j = r.size();
  while (j - i >= 2 && r[i].gen == r[j - 1].gen && r[i].exp == -r[j - 1].exp) {
    ++i;
    --j;
  }
  return Word(r.begin() + static_cast<long>(i), r.begin() + static_cast<long>(j));
}

bool is_relator_or_trivial(const Word& w, const Presentation& pres) {
  const Word c = cyclic_reduce(w);
  if (c.empty()) return true;
  for (const Word& rel : pres.relators) {
    for (const Word& cand : {cyclic_reduce(rel), cyclic_reduce(inverse(rel))}) {
      if (cand.size() != c.size()) continue;
      for (size_t s = 0; s < cand.size(); ++s) {
        bool eq = true;
        for (size_t i = 0; i < c.size() && eq; ++i) eq = c[i] == cand[(i + s) % cand.size()];
        if (eq) return true;
      }
    }
  }
  return false;
}

int CoverMesh::face_base_vertex(int f) const {
  const FaceSide& s = faces.at(f).boundary.at(0);
  const MeshEdge& e = edges.at(s.edge);
  return s.forward ? e.u : e.v;
}

Word CoverMesh::face_word(int f) const {
  Word w;
  for (const FaceSide& s : faces.at(f).boundary) {
    const MeshEdge& e = edges.at(s.edge);
    w = concat(w, s.forward ? e.label : inverse(e.label));
  }
  return free_reduce(w);
}

double CoverMesh::total_volume() const {
  double acc = 0.0;
  for (const MeshVertex& v : vertices) acc += v.w0;
  return acc;
}

void CoverMesh::validate() const {
  if (vertices.empty()) throw std::invalid_argument("mesh: no vertices");
  for (const MeshVertex& v : vertices) {
    if (!(v.w0 > 0.0)) throw std::invalid_argument("mesh: non-positive vertex weight");
  }
  if (std::abs(total_volume() - 1.0) > 1e-9) {
    throw std::invalid_argument("mesh: vertex weights do not sum to 1");
  }
  const int ng = static_cast<int>(presentation.generators.size());
  for (const MeshEdge& e : edges) {
    if (e.u < 0 || e.u >= num_vertices() || e.v < 0 || e.v >= num_vertices()) {
      throw std::invalid_argument("mesh: edge endpoint out of range");
    }
    if (!(e.w1 > 0.0)) throw std::invalid_argument("mesh: non-positive edge weight");
    for (const Letter& l : e.label) {
      if (l.gen < 0 || l.gen >= ng || (l.exp != 1 && l.exp != -1)) {
        throw std::invalid_argument("mesh: malformed edge label");
      }
    }
  }
  for (const Word& r : presentation.relators) {
    for (const Letter& l : r) {
      if (l.gen < 0 || l.gen >= ng) throw std::invalid_argument("mesh: malformed relator");
    }
  }
  for (int f = 0; f < num_faces(); ++f) {
    const MeshFace& face = faces[f];
    if (face.boundary.size() < 3) throw std::invalid_argument("mesh: face with < 3 sides");
    if (!(face.area > 0.0)) throw std::invalid_argument("mesh: non-positive face area");
    int at = -1;
    for (const FaceSide& s : face.boundary) {
      if (s.edge < 0 || s.edge >= num_edges()) {
        throw std::invalid_argument("mesh: face references missing edge");
      }
      const MeshEdge& e = edges[s.edge];
      const int from = s.forward ? e.u : e.v;
      const int to = s.forward ? e.v : e.u;
      if (at >= 0 && from != at) throw std::invalid_argument("mesh: face boundary is not a walk");
      at = to;
    }
    if (at != face_base_vertex(f)) throw std::invalid_argument("mesh: face boundary not closed");
    if (!is_relator_or_trivial(face_word(f), presentation)) {
      throw std::invalid_argument("mesh: face word is not a relator");
    }
  }
}

CoverMesh build_circle(int n) {
  if (n < 3) throw std::invalid_argument("build_circle: n must be >= 3");
  CoverMesh m;
  m.kind = "circle";
  m.dimension = 1;
  m.size_params = {n};
  m.h = 1.0 / n;
  m.presentation.generators = {"a"};
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    m.vertices.push_back({1.0 / n, std::cos(th), std::sin(th)});
  }
  for (int i = 0; i < n; ++i) {
    MeshEdge e;
    e.u = i;
    e.v = (i + 1) % n;
    e.w1 = static_cast<double>(n);
    if (i == n - 1) e.label = {{0, 1}};
    m.edges.push_back(e);
  }
  return m;
}

CoverMesh build_torus(int n, int m) {
  if (n < 3 || m < 3) throw std::invalid_argument("build_torus: sizes must be >= 3");
  CoverMesh t;
  t.kind = "torus";
  t.dimension = 2;
  t.size_params = {n, m};
  t.h = 1.0 / std::min(n, m);
  t.presentation.generators = {"a", "b"};
  t.presentation.relators = {{{0, 1}, {1, 1}, {0, -1}, {1, -1}}};
  auto vid = [n](int i, int j) { return i + n * j; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      t.vertices.push_back({1.0 / (n * m), double(i) / n, double(j) / m});
    }
  }
  // x-edges first (index vid), then y-edges (index n*m + vid).
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      MeshEdge e;
      e.u = vid(i, j);
      e.v = vid((i + 1) % n, j);
      e.w1 = double(n) / m;
      if (i == n - 1) e.label = {{0, 1}};
      t.edges.push_back(e);
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      MeshEdge e;
      e.u = vid(i, j);
      e.v = vid(i, (j + 1) % m);
      e.w1 = double(m) / n;
      if (j == m - 1) e.label = {{1, 1}};
      t.edges.push_back(e);
    }
  }
  const int nx = n * m;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      MeshFace f;
      f.area = 1.0 / (n * m);
      f.boundary = {{vid(i, j), true},
                    {nx + vid((i + 1) % n, j), true},
                    {vid(i, (j + 1) % m), false},
                    {nx + vid(i, j), false}};
      t.faces.push_back(f);
    }
  }
  return t;
}

namespace {

using C = std::complex<double>;
using M2 = Eigen::Matrix2cd;

M2 rot(double a) {
  M2 r;
  r << std::polar(1.0, a / 2), 0.0, 0.0, std::polar(1.0, -a / 2);
  return r;
}

M2 hyp_translate(double l) {
  M2 t;
  t << std::cosh(l / 2), std::sinh(l / 2), std::sinh(l / 2), std::cosh(l / 2);
  return t;
}

C mobius(const M2& g, C z) { return (g(0, 0) * z + g(0, 1)) / (g(1, 0) * z + g(1, 1)); }

double disk_dist(C z, C w) {
  const double num = 2.0 * std::norm(z - w);
  const double den = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
  return std::acosh(1.0 + num / den);
}

C disk_midpoint(C z, C w) {
  auto lift = [](C p) {
    const double s = 1.0 - std::norm(p);
    return std::array<double, 3>{(1.0 + std::norm(p)) / s, 2.0 * p.real() / s, 2.0 * p.imag() / s};
  };
  const auto a = lift(z);
  const auto b = lift(w);
  std::array<double, 3> m{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  const double q = std::sqrt(m[0] * m[0] - m[1] * m[1] - m[2] * m[2]);
  for (double& c : m) c /= q;
  return C(m[1], m[2]) / (1.0 + m[0]);
}

double hyp_triangle_area(C a, C b, C c) {
  const double la = disk_dist(b, c);
  const double lb = disk_dist(c, a);
  const double lc = disk_dist(a, b);
  auto angle = [](double opp, double s1, double s2) {
    const double v = (std::cosh(s1) * std::cosh(s2) - std::cosh(opp)) / (std::sinh(s1) * std::sinh(s2));
    return std::acos(std::clamp(v, -1.0, 1.0));
  };
  return std::numbers::pi - angle(la, lb, lc) - angle(lb, lc, la) - angle(lc, la, lb);
}

constexpr double kPi = std::numbers::pi;

double side_mid_angle(int j) { return j * kPi / 4 + kPi / 8; }

// g_j maps side j+2 onto side j (j in {0,1,4,5}).
M2 side_pairing(int j) {
  const double d = std::acosh(1.0 / std::tan(kPi / 8));
  const double mj = side_mid_angle(j);
  return rot(mj) * hyp_translate(2.0 * d) * rot(-mj) * rot(mj + kPi - side_mid_angle(j + 2));
}

M2 word_matrix(const Word& w, const std::vector<M2>& gens) {
  M2 acc = M2::Identity();
  for (const Letter& l : w) acc = acc * (l.exp > 0 ? gens[l.gen] : M2(gens[l.gen].inverse()));
  return acc;
}

bool same_mobius(const M2& a, const M2& b) {
  return (a - b).norm() < 1e-7 || (a + b).norm() < 1e-7;
}

}  // namespace

std::vector<Eigen::Matrix2cd> octagon_generators_disk() {
  return {side_pairing(0), side_pairing(1).inverse(), side_pairing(4), side_pairing(5).inverse()};
}

CoverMesh build_genus2(int k) {
  if (k < 1) throw std::invalid_argument("build_genus2: depth must be >= 1");
  const std::vector<M2> gens = octagon_generators_disk();
  Presentation pres;
  pres.generators = {"a1", "b1", "a2", "b2"};
  pres.relators = {{{0, 1}, {1, 1}, {0, -1}, {1, -1}, {2, 1}, {3, 1}, {2, -1}, {3, -1}}};
  // Word of g_j for the four pairings j = 0, 1, 4, 5.
  std::map<int, Word> pairing_word = {
      {0, {{0, 1}}}, {1, {{1, -1}}}, {4, {{2, 1}}}, {5, {{3, -1}}}};

  const double R = std::acosh(std::pow(1.0 / std::tan(kPi / 8), 2));
  const double rc = std::tanh(R / 2);
  std::vector<C> pts = {C(0, 0)};
  std::vector<unsigned> sides = {0u};
  for (int c = 0; c < 8; ++c) {
    pts.push_back(std::polar(rc, c * kPi / 4));
    // corner c lies on sides c-1 and c
    sides.push_back((1u << c) | (1u << ((c + 7) % 8)));
  }
  std::vector<std::array<int, 3>> tris;
  for (int c = 0; c < 8; ++c) tris.push_back({0, 1 + c, 1 + (c + 1) % 8});

  for (int level = 1; level < k; ++level) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      pts.push_back(disk_midpoint(pts[a], pts[b]));
      sides.push_back(sides[a] & sides[b]);
      const int id = static_cast<int>(pts.size()) - 1;
      mid[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& t : tris) {
      const int ab = midpoint(t[0], t[1]);
      const int bc = midpoint(t[1], t[2]);
      const int ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({ab, t[1], bc});
      next.push_back({ca, bc, t[2]});
      next.push_back({ab, bc, ca});
    }
    tris.swap(next);
  }

  const int np = static_cast<int>(pts.size());
  std::vector<int> rep(np, -1);
  std::vector<Word> lift(np);
  std::vector<bool> known(np, false);
  auto is_corner = [](int p) { return p >= 1 && p <= 8; };
  auto find_point = [&](C z, unsigned side_mask) {
    for (int q = 0; q < np; ++q) {
      if ((sides[q] & side_mask) && std::abs(pts[q] - z) < 1e-9) return q;
    }
    throw std::logic_error("build_genus2: side pairing image not found");
  };
  for (int p = 0; p < np; ++p) {
    if (is_corner(p)) continue;
    rep[p] = p;
    known[p] = true;
    for (int j : {0, 1, 4, 5}) {
      if (sides[p] & (1u << (j + 2))) {
        rep[p] = find_point(mobius(side_pairing(j), pts[p]), 1u << j);
        lift[p] = inverse(pairing_word[j]);
      }
    }
  }
  // Corners: all identified with corner 0; words found by walking pairings.
  std::queue<int> frontier;
  frontier.push(1);
  known[1] = true;
  rep[1] = 1;
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop();
    for (int j : {0, 1, 4, 5}) {
      if (sides[p] & (1u << (j + 2))) {
        const int q = find_point(mobius(side_pairing(j), pts[p]), 1u << j);
        if (!known[q]) {
          known[q] = true;
          rep[q] = 1;
          lift[q] = free_reduce(concat(pairing_word[j], lift[p]));
          frontier.push(q);
        }
      }
      if (sides[p] & (1u << j)) {
        const int q = find_point(mobius(side_pairing(j).inverse(), pts[p]), 1u << (j + 2));
        if (!known[q]) {
          known[q] = true;
          rep[q] = 1;
          lift[q] = free_reduce(concat(inverse(pairing_word[j]), lift[p]));
          frontier.push(q);
        }
      }
    }
  }
  for (int p = 0; p < np; ++p) {
    if (!known[p]) throw std::logic_error("build_genus2: unresolved corner");
  }

  std::vector<int> vid(np, -1);
  CoverMesh mesh;
  mesh.kind = "genus2";
  mesh.dimension = 2;
  mesh.size_params = {k};
  mesh.presentation = pres;
  for (int p = 0; p < np; ++p) {
    if (rep[p] == p) {
      vid[p] = mesh.num_vertices();
      mesh.vertices.push_back({0.0, pts[p].real(), pts[p].imag()});
    }
  }
  const double total_area = 4.0 * kPi;
  std::vector<double> edge_share;
  std::vector<double> edge_len2;
  std::vector<M2> edge_mat;
  auto locate_edge = [&](int p, int q) -> FaceSide {
    const int u = vid[rep[p]];
    const int v = vid[rep[q]];
    const Word label = free_reduce(concat(inverse(lift[p]), lift[q]));
    const M2 Mlab = word_matrix(label, gens);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const MeshEdge& E = mesh.edges[e];
      if (E.u == u && E.v == v && same_mobius(edge_mat[e], Mlab)) return {e, true};
      if (E.u == v && E.v == u && same_mobius(edge_mat[e], M2(Mlab.inverse()))) return {e, false};
    }
    MeshEdge E;
    E.u = u;
    E.v = v;
    E.label = label;
    mesh.edges.push_back(E);
    edge_mat.push_back(Mlab);
    edge_share.push_back(0.0);
    const double l = disk_dist(pts[p], pts[q]);
    edge_len2.push_back(l * l / total_area);
    return {mesh.num_edges() - 1, true};
  };
  double hmax = 0.0;
  for (const auto& t : tris) {
    const double area = hyp_triangle_area(pts[t[0]], pts[t[1]], pts[t[2]]) / total_area;
    MeshFace face;
    face.area = area;
    for (int s = 0; s < 3; ++s) {
      const int p = t[s];
      const int q = t[(s + 1) % 3];
      const FaceSide side = locate_edge(p, q);
      face.boundary.push_back(side);
      edge_share[side.edge] += area / 3.0;
      mesh.vertices[vid[rep[p]]].w0 += area / 3.0;
      hmax = std::max(hmax, std::sqrt(edge_len2[side.edge]));
    }
    mesh.faces.push_back(face);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    mesh.edges[e].w1 = 2.0 * edge_share[e] / edge_len2[e];
  }
  // Renormalize against the accumulated area so that weights sum to 1 exactly.
  double vol = mesh.total_volume();
  for (MeshVertex& v : mesh.vertices) v.w0 /= vol;
  for (MeshFace& f : mesh.faces) f.area /= vol;
  mesh.h = hmax;
  return mesh;
}

GramData gram_data(const CoverMesh& mesh) {
  GramData g;
  g.vertex_mass.resize(mesh.num_vertices());
  g.edge_mass.resize(mesh.num_edges());
  g.face_mass.resize(mesh.num_faces());
  for (int i = 0; i < mesh.num_vertices(); ++i) g.vertex_mass(i) = mesh.vertices[i].w0;
  for (int i = 0; i < mesh.num_edges(); ++i) g.edge_mass(i) = mesh.edges[i].w1;
  for (int i = 0; i < mesh.num_faces(); ++i) g.face_mass(i) = 1.0 / mesh.faces[i].area;
  return g;
}

}  // namespace equivar
