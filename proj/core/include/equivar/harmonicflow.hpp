#pragma once

#include <vector>

#include "equivar/meshcover.hpp"
#include "equivar/repvar.hpp"
#include "equivar/symspace.hpp"

namespace equivar {

// Values on the fundamental domain; across a labeled edge the target value is
// act(rho(label), f(v)).
struct EquivariantMap {
  std::vector<SymPoint> values;
};

EquivariantMap constant_map(const CoverMesh& mesh, int n);
// Random map with values exp(H) for Hermitian H of the given scale.
EquivariantMap random_map(const CoverMesh& mesh, const Algebra& alg, unsigned long long seed,
                          double scale = 0.5);
void check_map(const CoverMesh& mesh, const Algebra& alg, const EquivariantMap& f);
// Smooth doubly periodic 2x2 metric sampled at the vertex coordinates of a
// torus mesh; equivariant for the trivial representation and not harmonic.
EquivariantMap periodic_test_map(const CoverMesh& torus);

// Per-edge transported target act(rho(label), f(v)).
std::vector<SymPoint> edge_targets(const CoverMesh& mesh, const std::vector<GroupElem>& hol,
                                   const EquivariantMap& f);
// beta_e = mc_edge(f(u), transported f(v)), living at the source.
std::vector<AlgElem> edge_betas(const CoverMesh& mesh, const Representation& rho,
                                const EquivariantMap& f);

double energy(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f);
std::vector<AlgElem> tension(const CoverMesh& mesh, const Representation& rho,
                             const EquivariantMap& f);
// Vertex-mass weighted L2 norm of a vertex field in the fibre metric.
double field_norm(const CoverMesh& mesh, const EquivariantMap& f, const std::vector<AlgElem>& field);
double tension_norm(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f);

struct FlowParams {
  double tol = 1e-8;
  int max_iter = 5000;
  double radius = 50.0;
  bool precondition = true;
  double armijo = 1e-4;
};

struct FlowReport {
  double energy = 0.0;
  double tension_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double drift = 0.0;
  bool reductive_suspected = true;
  bool step_underflow = false;
  double max_energy_increase = 0.0;  // over accepted steps; should be <= 0
  std::vector<double> energy_history;
};

struct FlowResult {
  EquivariantMap map;
  FlowReport report;
};

FlowResult flow(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f0,
                const FlowParams& params = {});

struct RepEnergy {
  double energy = 0.0;
  bool reductive_suspected = true;
  FlowResult best;
};

// Minimum over a flow from the constant map and `restarts` random starts.
RepEnergy energy_of_rep(const CoverMesh& mesh, const Representation& rho,
                        const FlowParams& params = {}, int restarts = 2,
                        unsigned long long seed = 1);

// Translate so that f(v0) = I; returns the translated map.
EquivariantMap normalize_basepoint(const EquivariantMap& f, int v0 = 0);
// The translating element g with act(g, f(v0)) = I.
GroupElem basepoint_translation(const EquivariantMap& f, int v0 = 0);
double sup_distance(const EquivariantMap& a, const EquivariantMap& b);

}  // namespace equivar
