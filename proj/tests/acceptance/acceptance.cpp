// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equivar/energyvar.hpp"
#include "support/instances.hpp"

using namespace equivar;
using namespace equivar::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const double kLn2 = std::log(2.0);

FlowParams tight_flow() {
  FlowParams p;
  p.tol = 1e-11;
  p.max_iter = 20000;
  return p;
}

FdParams tight_fd() {
  FdParams p;
  p.flow = tight_flow();
  return p;
}

TwistedComplex complex_at(const CoverMesh& mesh, const Representation& rho) {
  return TwistedComplex(mesh, rho, harmonic(mesh, rho).map);
}

struct NamedPath {
  std::string name;
  CoverMesh mesh;
  RepPath path;
};

std::vector<NamedPath> builtin_paths() {
  const CoverMesh t = build_torus(4, 4);
  const CoverMesh c = build_circle(8);
  const CoverMesh g = build_genus2(1);
  std::mt19937_64 rng(17);
  const Representation fc = fuchsian_genus2(GroupKind::SL_C);
  return {
      {"diagonal", t, diagonal_path(t)},
      {"cstar", t, cstar_path(t)},
      {"axis", c, axis_path(c)},
      {"bending-real", g, bending_path(fuchsian_genus2(), 1.0)},
      {"bending-imag", g, bending_path(fc, cplx(0.0, 1.0))},
      {"conjugation", g, conjugation_path(fc, random_element(fc.algebra, rng))},
  };
}

// 1. Geodesic energy of a hyperbolic Z-representation.
void geodesic_energy(Outcome& o) {
  const CoverMesh c = build_circle(8);
  const FlowResult r = flow(c, hyperbolic_circle(c, 2.0), random_map(c, Algebra::sl_real(2), 3), tight_flow());
  const double expected = 4.0 * kLn2 * kLn2;
  const double rel = std::abs(r.report.energy - expected) / expected;
  o.detail << "E=" << r.report.energy << " rel=" << rel;
  o.check(r.report.converged, "flow converged");
  o.check(rel < 1e-6, "energy within 1e-6 relative");
  for (double lambda : {1.5, 2.0, 3.0}) {
    const Mat g = expm(diag2(std::log(lambda)));
    const TranslationResult tl = translation_length(g);
    const double oracle = translation_length_oracle(g.real());
    const double tl_rel = std::abs(tl.length - oracle) / oracle;
    const FlowResult f = flow(c, hyperbolic_circle(c, lambda), constant_map(c, 2), tight_flow());
    const double ratio = f.report.energy / (tl.length * tl.length);
    o.detail << " | lambda=" << lambda << " L_rel=" << tl_rel << " E/L^2=" << ratio;
    o.check(tl_rel < 1e-6, "translation length vs golden-section oracle");
    o.check(std::abs(ratio - 0.5) < 1e-6, "E/L^2 = 1/2");
  }
}

// 2. Parabolic representation: energy tends to zero without a minimizer.
void semisimplification(Outcome& o) {
  const CoverMesh c = build_circle(8);
  const FlowResult r = flow(c, parabolic_circle(c), constant_map(c, 2));
  o.detail << "E=" << r.report.energy << " converged=" << r.report.converged
           << " reductive_suspected=" << r.report.reductive_suspected << " drift=" << r.report.drift;
  o.check(r.report.energy < 1e-3, "energy below 1e-3");
  o.check(!r.report.converged, "no convergence");
  o.check(!r.report.reductive_suspected, "non-reductive flag set");
}

// 3. Hodge suite.
void hodge_suite(Outcome& o) {
  const CoverMesh t = build_torus(4, 4);
  const CoverMesh g = build_genus2(1);
  struct Inst {
    std::string name;
    CoverMesh mesh;
    Representation rho;
  };
  const std::vector<Inst> insts = {
      {"diagonal-SLC", t, diagonal_path(t).base()},
      {"trivial-SLR", t, trivial_representation(Algebra::sl_real(2), t.presentation)},
      {"cstar", t, cstar_path(t).base()},
      {"unitary", t, unitary_torus(t)},
      {"fuchsian-SLR", g, fuchsian_genus2()},
      {"fuchsian-SLC", g, fuchsian_genus2(GroupKind::SL_C)},
  };
  std::mt19937_64 rng(23);
  double dd = 0.0, adj = 0.0, recon = 0.0, split = 0.0;
  for (const Inst& in : insts) {
    const TwistedComplex cx = complex_at(in.mesh, in.rho);
    for (int trial = 0; trial < 3; ++trial) {
      const TwistedCochain x0 = random_cochain(cx, 0, rng);
      dd = std::max(dd, cx.norm(cx.d(cx.d(x0))) / cx.norm(x0));
      for (int deg : {0, 1}) {
        const TwistedCochain a = random_cochain(cx, deg, rng), b = random_cochain(cx, deg + 1, rng);
        const double lhs = cx.inner(cx.d(a), b), rhs = cx.inner(a, cx.codiff(b));
        adj = std::max(adj, std::abs(lhs - rhs) / (cx.norm(cx.d(a)) * cx.norm(b)));
      }
      recon = std::max(recon, hodge_decompose(cx, random_cochain(cx, 1, rng)).reconstruction_error);
    }
    split = std::max(split, kernel_split_residual(cx));
    o.detail << in.name << ":dimH=" << cx.kernel_dim() << " ";
    if (in.name == "diagonal-SLC") o.check(cx.kernel_dim() == 2, "kernel dimension 2 on the diagonal instance");
  }
  o.detail << "dd=" << dd << " adj=" << adj << " recon=" << recon << " split=" << split;
  o.check(dd < 1e-12, "d^2 = 0");
  o.check(adj < 1e-10, "adjunction");
  o.check(recon < 1e-8, "Hodge reconstruction");
  o.check(split < 1e-8, "kernel splitting");
}

// 4. First-order deformations.
void first_order_pipeline(Outcome& o) {
  double worst = 0.0;
  for (const NamedPath& np : builtin_paths()) {
    const TwistedComplex cx = complex_at(np.mesh, np.path.base());
    const FirstOrderDeformation d = first_order(cx, path_jets(np.path).c);
    const double r = std::max(d.jacobi_residual, d.primitive.equivariance_residual);
    worst = std::max(worst, r);
    o.check(r < 1e-8, np.name + " residuals");
  }
  o.detail << "max residual=" << worst;
  // Affine fibre: two solutions differ by a parallel section whose [p]-part is parallel too.
  const CoverMesh t = build_torus(4, 4);
  const RepPath p = diagonal_path(t);
  const TwistedComplex cx = complex_at(t, p.base());
  const Cocycle c = path_jets(p).c;
  std::mt19937_64 rng(29);
  const TwistedCochain start = random_cochain(cx, 0, rng);
  const FirstOrderDeformation a = first_order(cx, c), b = first_order(cx, c, &start);
  const TwistedCochain diff = sub(b.primitive.F, a.primitive.F);
  const TwistedCochain dv = sub(b.v, a.v);
  const double off = cx.norm(sub(diff, cx.project_kernel(diff))) / cx.norm(diff);
  const double off_p = cx.norm(sub(dv, cx.project_kernel(dv))) / std::max(cx.norm(dv), 1e-300);
  o.detail << " fibre_off_kernel=" << off << " fibre_p_off_kernel=" << off_p << " |diff|=" << cx.norm(diff);
  o.check(b.jacobi_residual < 1e-8, "second solution residual");
  o.check(cx.norm(diff) > 1e-6, "distinct solutions");
  o.check(off < 1e-8, "difference lies in ker J");
  o.check(off_p < 1e-8, "[p]-part of difference lies in ker J");
}

// 5. First variation against finite differences.
void first_variation_fd(Outcome& o) {
  for (const NamedPath& np : builtin_paths()) {
    if (np.name != "diagonal" && np.name != "cstar" && np.name != "axis" && np.name != "conjugation") continue;
    const VariationReport r = variation_report(np.mesh, np.path, tight_fd());
    if (np.name == "conjugation") {
      o.detail << np.name << ":abs=" << r.first_abs_error << " ";
      o.check(r.first_abs_error < 1e-8, "conjugation absolute error");
    } else {
      o.detail << np.name << ":rel=" << r.first_rel_error << " ";
      o.check(r.first_rel_error < 1e-3, np.name + " relative error");
    }
    o.check(r.fd.all_converged, np.name + " FD flows converged");
  }
}

// 6. Critical points.
void criticality(Outcome& o) {
  const CoverMesh t = build_torus(4, 4);
  const Representation u = unitary_torus(t);
  const double scan_u = critical_scan(complex_at(t, u), cocycle_basis(u));
  // Non-unitary C* point; the Higgs scaling direction moves the real parts
  // of the logarithms.
  const cplx z1(0.4, 0.3), z2(-0.2, 0.5);
  const Representation cs = cstar_path(t, z1, z2).base();
  const Cocycle scaling{{scalar1(z1.real()), scalar1(z2.real())}};
  const double scan_c = critical_scan(complex_at(t, cs), {scaling});
  o.detail << "unitary=" << scan_u << " cstar_scaling=" << scan_c;
  o.check(scan_u < 1e-9, "unitary scan");
  o.check(scan_c > 0.1, "C* scaling direction non-critical");
}

// 7. Obstructions.
void obstruction(Outcome& o) {
  const CoverMesh t = build_torus(4, 4);
  {
    const Representation rho = trivial_representation(Algebra::sl_real(2), t.presentation);
    const TwistedComplex cx(t, rho, constant_map(t, 2));
    const Jet2Cocycle ck = obstruction_jet();
    bool refused = false;
    double defect = 0.0, witness_err = 1e300;
    try {
      second_order(cx, ck);
    } catch (const ObstructedError& e) {
      refused = true;
      defect = e.result().defect;
      witness_err = 0.0;
      for (const Mat& w : e.result().witness.values) witness_err = std::max(witness_err, (w - diag2(1.0)).norm());
    }
    o.detail << "example: defect=" << defect << " witness_err=" << witness_err;
    o.check(refused && defect > 0.0, "obstruction example refused with positive defect");
    o.check(witness_err < 1e-8, "witness diag(1,-1)");
  }
  {
    const RepPath p = diagonal_path(t);
    const TwistedComplex cx = complex_at(t, p.base());
    bool ok = true;
    try {
      second_order(cx, path_jets(p));
    } catch (const ObstructedError&) {
      ok = false;
    }
    o.check(ok, "Cartan line passes");
  }
  {
    const Representation rho = trivial_representation(Algebra::sl_complex(2), t.presentation);
    const TwistedComplex cx(t, rho, constant_map(t, 2));
    std::mt19937_64 rng(31);
    double gap = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Cocycle c{{random_element(rho.algebra, rng), random_element(rho.algebra, rng)}};
      const double d1 = obstruction_check(cx, harmonic_rep(cx, c).omega).defect;
      const double d2 = obstruction_check(cx, harmonic_rep(cx, scale(c, cplx(0, 1))).omega).defect;
      gap = std::max(gap, std::abs(d1 - d2));
    }
    o.detail << " |defect(c)-defect(ic)|=" << gap;
    o.check(gap < 1e-12, "defect(c) = defect(ic)");
  }
  {
    int agree = 0, obstructed = 0, total = 0;
    double worst = 0.0;
    for (const BankInstance& b : obstruction_bank(t, 50, 37)) {
      const TwistedComplex cx = complex_at(t, b.path.base());
      const Jet2Cocycle ck = path_jets(b.path);
      const FirstOrderDeformation d = first_order(cx, ck.c);
      const ObstructionResult r = obstruction_check(cx, d.harmonic.omega);
      const PsiSolution s = solve_psi_unchecked(cx, d.harmonic.omega, d.primitive.F, ck);
      const double tol = std::max(1e-7 * r.omega_norm2, 1e-12);
      const bool psi_exists = s.codiff_residual <= tol && s.d_residual < 1e-7;
      if (r.orthogonal == psi_exists) ++agree;
      if (r.orthogonal) worst = std::max(worst, std::max(s.codiff_residual, s.d_residual));
      obstructed += r.orthogonal ? 0 : 1;
      ++total;
    }
    o.detail << " bank: agree=" << agree << "/" << total << " obstructed=" << obstructed
             << " max_unobstructed_residual=" << worst;
    o.check(agree == total, "condition equivalence on the bank");
    o.check(worst < 1e-7, "psi residuals on unobstructed bank instances");
  }
}

// 8. Second variation against finite differences.
void second_variation_fd(Outcome& o) {
  const CoverMesh t = build_torus(4, 4);
  const VariationReport r = variation_report(t, diagonal_path(t), tight_fd());
  o.detail << "rel=" << r.second_rel_error << " d_res=" << r.psi_d_residual << " codiff_res=" << r.psi_codiff_residual;
  o.check(r.second_rel_error < 1e-2, "second variation relative error");
  o.check(r.psi_d_residual < 1e-7 && r.psi_codiff_residual < 1e-7, "psi residuals");
}

// 9. Plurisubharmonicity.
void plurisubharmonicity(Outcome& o) {
  const CoverMesh t = build_torus(4, 4);
  std::vector<NamedPath> insts = {
      {"diagonal", t, diagonal_path(t)},
      {"cstar", t, cstar_path(t)},
  };
  const CoverMesh g = build_genus2(1);
  const Representation fc = fuchsian_genus2(GroupKind::SL_C);
  insts.push_back({"bending-imag", g, bending_path(fc, cplx(0.0, 1.0))});
  insts.push_back({"bending-mixed", g, bending_path(fc, cplx(0.4, 0.7))});
  for (const BankInstance& b : obstruction_bank(t, 20, 41)) {
    if (b.path.algebra.kind() == GroupKind::SL_C) insts.push_back({b.label, t, b.path});
  }
  int tested = 0, skipped = 0;
  double worst = 0.0;
  for (const NamedPath& np : insts) {
    const TwistedComplex cx = complex_at(np.mesh, np.path.base());
    try {
      const PshResult r = psh_defect(cx, path_jets(np.path));
      ++tested;
      const double rel = r.defect / std::max(r.omega_norm2, 1e-300);
      if (r.omega_norm2 > 0.0) worst = std::max(worst, rel);
      o.check(r.defect < 0.02 * r.omega_norm2 || r.defect < 1e-12, np.name + " defect < 2% |omega|^2");
      if (np.name == "cstar") {
        o.detail << "cstar=" << r.defect << " ";
        o.check(r.defect < 1e-10, "C* defect < 1e-10");
      }
    } catch (const ObstructedError&) {
      ++skipped;
    }
  }
  o.detail << "tested=" << tested << " obstructed_skipped=" << skipped << " max_rel_defect=" << worst;
}

// 10. Continuity of harmonic maps and energy in the representation.
void continuity(Outcome& o) {
  const CoverMesh g = build_genus2(1);
  const CoverMesh t = build_torus(4, 4);
  const std::vector<NamedPath> insts = {
      {"fuchsian-bending", g, bending_path(fuchsian_genus2(GroupKind::SL_C), cplx(0.3, 1.0))},
      {"diagonal", t, diagonal_path(t)},
  };
  const double kBound = 10.0;
  for (const NamedPath& np : insts) {
    const FlowResult base = flow(np.mesh, np.path.base(), constant_map(np.mesh, 2), tight_flow());
    o.check(base.report.converged, np.name + " base flow");
    std::vector<double> map_ratio, energy_ratio;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const FlowResult r = flow(np.mesh, np.path.at(eps), base.map, tight_flow());
      o.check(r.report.converged, np.name + " perturbed flow");
      map_ratio.push_back(sup_distance(normalize_basepoint(r.map), normalize_basepoint(base.map)) / eps);
      energy_ratio.push_back(std::abs(r.report.energy - base.report.energy) / eps);
    }
    o.detail << np.name << ": map/eps=";
    for (double x : map_ratio) o.detail << x << ",";
    o.detail << " dE/eps=";
    for (double x : energy_ratio) o.detail << x << ",";
    o.detail << " ";
    for (size_t i = 1; i < map_ratio.size(); ++i) {
      o.check(map_ratio[i] <= kBound * map_ratio[0] + 1e-9, np.name + " map ratio bounded");
      o.check(energy_ratio[i] <= kBound * energy_ratio[0] + 1e-9, np.name + " energy ratio bounded");
    }
  }
}

// 11. Refinement of the Maurer-Cartan residual on the torus.
void refinement(Outcome& o) {
  std::vector<double> res;
  for (int n : {4, 8, 16, 32}) {
    const CoverMesh t = build_torus(n, n);
    const Representation rho = trivial_representation(Algebra::sl_real(2), t.presentation);
    res.push_back(maurer_cartan_residual(t, rho, periodic_test_map(t)));
  }
  o.detail << "levels 4,8,16,32: ";
  for (double r : res) o.detail << r << " ";
  for (size_t i = 1; i < res.size(); ++i) o.check(res[i] < res[i - 1], "monotone decrease");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"geodesic energy", geodesic_energy},
      {"semisimplification", semisimplification},
      {"hodge suite", hodge_suite},
      {"first-order pipeline", first_order_pipeline},
      {"first variation vs FD", first_variation_fd},
      {"criticality", criticality},
      {"obstruction", obstruction},
      {"second variation vs FD", second_variation_fd},
      {"plurisubharmonicity", plurisubharmonicity},
      {"continuity", continuity},
      {"refinement", refinement},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
