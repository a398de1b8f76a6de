#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace equivar {

// A letter is a generator index with exponent +1 or -1.
struct Letter {
  int gen = 0;
  int exp = 1;
  bool operator==(const Letter& o) const { return gen == o.gen && exp == o.exp; }
};
using Word = std::vector<Letter>;

struct Presentation {
  std::vector<std::string> generators;
  std::vector<Word> relators;

  int generator_index(const std::string& name) const;  // -1 if absent
};

// Tokens are separated by whitespace. A token names a generator, or the
// generator with its first letter upper-cased, which denotes the inverse.
Word parse_word(const std::string& text, const Presentation& pres);
std::string format_word(const Word& w, const Presentation& pres);

Word inverse(const Word& w);
Word concat(const Word& a, const Word& b);
Word free_reduce(const Word& w);
Word cyclic_reduce(const Word& w);
// True when w is freely trivial or is conjugate in the free group to a
// relator or its inverse.
bool is_relator_or_trivial(const Word& w, const Presentation& pres);

struct MeshVertex {
  double w0 = 0.0;
  double x = 0.0;  // drawing coordinates only
  double y = 0.0;
};

// The lift of the target sits at label * (lift of v).
struct MeshEdge {
  int u = 0;
  int v = 0;
  Word label;
  double w1 = 0.0;
};

struct FaceSide {
  int edge = 0;
  bool forward = true;
};

// Boundary walk; its base vertex is where the first side starts.
struct MeshFace {
  std::vector<FaceSide> boundary;
  double area = 0.0;
};

class CoverMesh {
 public:
  std::string kind;  // "circle", "torus", "genus2" or "custom"
  int dimension = 1;
  std::vector<int> size_params;
  double h = 0.0;  // characteristic edge length, the refinement parameter
  Presentation presentation;
  std::vector<MeshVertex> vertices;
  std::vector<MeshEdge> edges;
  std::vector<MeshFace> faces;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }

  int face_base_vertex(int f) const;
  // Deck word accumulated along the boundary walk of a face.
  Word face_word(int f) const;
  double total_volume() const;

  // Throws std::invalid_argument when a structural invariant fails.
  void validate() const;
};

CoverMesh build_circle(int n);
CoverMesh build_torus(int n, int m);
CoverMesh build_genus2(int k);

struct GramData {
  Eigen::VectorXd vertex_mass;
  Eigen::VectorXd edge_mass;
  Eigen::VectorXd face_mass;
};
GramData gram_data(const CoverMesh& mesh);

// Side-pairing Mobius maps of the regular pi/4 octagon in the Poincare disk,
// as SU(1,1) matrices, ordered a1, b1, a2, b2. They satisfy
// a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1 = +-I.
std::vector<Eigen::Matrix2cd> octagon_generators_disk();

}  // namespace equivar
