#include "equivar/harmonicflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace equivar {

namespace {

Mat herm(const Mat& A) { return 0.5 * (A + A.adjoint()); }

// Whitened coordinates: X = R Y S with R = P^{1/2}, S = P^{-1/2}.
struct Frame {
  Mat R;
  Mat S;
};

std::vector<Frame> frames(const EquivariantMap& f) {
  std::vector<Frame> out;
  out.reserve(f.values.size());
  for (const SymPoint& P : f.values) out.push_back({hpd_sqrt(P), hpd_inv_sqrt(P)});
  return out;
}

// Hermitian n x n matrices packed isometrically for Re tr(A B): diagonal
// entries, then sqrt2 Re and sqrt2 Im of the strict upper triangle.
void pack_into(const Mat& Y, double* out) {
  const int n = static_cast<int>(Y.rows());
  int k = 0;
  for (int i = 0; i < n; ++i) out[k++] = Y(i, i).real();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      out[k++] = std::sqrt(2.0) * Y(i, j).real();
      out[k++] = std::sqrt(2.0) * Y(i, j).imag();
    }
  }
}

Mat unpack_from(const double* in, int n) {
  Mat Y(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) Y(i, i) = in[k++];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double re = in[k++] / std::sqrt(2.0);
      const double im = in[k++] / std::sqrt(2.0);
      Y(i, j) = cplx(re, im);
      Y(j, i) = cplx(re, -im);
    }
  }
  return Y;
}

std::vector<Mat> unpack(const Eigen::VectorXd& x, int nv, int n) {
  std::vector<Mat> out;
  out.reserve(nv);
  for (int v = 0; v < nv; ++v) out.push_back(unpack_from(x.data() + v * n * n, n));
  return out;
}

void project_traceless(Eigen::VectorXd& x, int n) {
  for (Eigen::Index v = 0; v < x.size() / (n * n); ++v) {
    double* p = x.data() + v * n * n;
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += p[i];
    for (int i = 0; i < n; ++i) p[i] -= tr / n;
  }
}

// Energy gradient in whitened coordinates: dE = <-2 S tau R, Y>.
Eigen::VectorXd whitened_gradient(const std::vector<Frame>& fr, const std::vector<AlgElem>& tau) {
  const int nv = static_cast<int>(fr.size());
  const int n = static_cast<int>(tau[0].rows());
  Eigen::VectorXd g(nv * n * n);
  for (int v = 0; v < nv; ++v) pack_into(herm(-2.0 * fr[v].S * tau[v] * fr[v].R), g.data() + v * n * n);
  return g;
}

// Inverse of 4L + shift, L the w1-weighted graph Laplacian: the Hessian of the
// energy in whitened coordinates for an untwisted, flat configuration.
class Preconditioner {
 public:
  Preconditioner(const CoverMesh& mesh, int n) : nv_(mesh.num_vertices()), n2_(n * n) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(nv_);
    for (const MeshEdge& e : mesh.edges) {
      if (e.u == e.v) continue;
      const double w = 4.0 * e.w1;
      diag(e.u) += w;
      diag(e.v) += w;
      trip.emplace_back(e.u, e.v, -w);
      trip.emplace_back(e.v, e.u, -w);
    }
    // The constant mode is not a true zero of the Hessian once rho twists.
    const double shift = 1e-3 * std::max(diag.mean(), 1e-12);
    for (int i = 0; i < nv_; ++i) trip.emplace_back(i, i, diag(i) + shift);
    Eigen::SparseMatrix<double> A(nv_, nv_);
    A.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(A);
    if (solver_.info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const Eigen::Map<const Eigen::MatrixXd> rhs(x.data(), n2_, nv_);
    const Eigen::MatrixXd sol = solver_.solve(Eigen::MatrixXd(rhs.transpose()));
    Eigen::MatrixXd back = sol.transpose();
    return Eigen::Map<const Eigen::VectorXd>(back.data(), back.size());
  }

 private:
  int nv_;
  int n2_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

double drift_between(const SymPoint& a, const SymPoint& b) {
  try {
    return dist(a, b);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

EquivariantMap constant_map(const CoverMesh& mesh, int n) {
  return EquivariantMap{std::vector<SymPoint>(mesh.num_vertices(), Mat::Identity(n, n))};
}

EquivariantMap random_map(const CoverMesh& mesh, const Algebra& alg, unsigned long long seed,
                          double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  const int n = alg.n();
  EquivariantMap f;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Mat H(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) H(i, j) = cplx(nd(rng), alg.is_complex() ? nd(rng) : 0.0);
    }
    H = herm(H);
    if (alg.is_special()) H -= (H.trace() / double(n)) * Mat::Identity(n, n);
    f.values.push_back(hermitian_exp(H));
  }
  return f;
}

EquivariantMap periodic_test_map(const CoverMesh& torus) {
  if (torus.kind != "torus") throw std::invalid_argument("periodic_test_map: needs a torus mesh");
  constexpr double kTwoPi = 6.283185307179586;
  EquivariantMap f;
  for (const MeshVertex& v : torus.vertices) {
    const double a = 0.4 * std::sin(kTwoPi * v.x);
    const double b = 0.3 * std::cos(kTwoPi * v.y) + 0.2 * std::sin(kTwoPi * (v.x + v.y));
    Mat H(2, 2);
    H << a, b, b, -a;
    f.values.push_back(hermitian_exp(H));
  }
  return f;
}

void check_map(const CoverMesh& mesh, const Algebra& alg, const EquivariantMap& f) {
  if (static_cast<int>(f.values.size()) != mesh.num_vertices()) {
    throw std::invalid_argument("map: value count does not match vertex count");
  }
  for (const SymPoint& P : f.values) {
    if (P.rows() != alg.n()) throw std::invalid_argument("map: value dimension mismatch");
    check_point(P, alg.is_special(), 1e-8);
  }
}

std::vector<SymPoint> edge_targets(const CoverMesh& mesh, const std::vector<GroupElem>& hol,
                                   const EquivariantMap& f) {
  std::vector<SymPoint> out;
  out.reserve(mesh.edges.size());
  for (size_t i = 0; i < mesh.edges.size(); ++i) out.push_back(act(hol[i], f.values[mesh.edges[i].v]));
  return out;
}

std::vector<AlgElem> edge_betas(const CoverMesh& mesh, const Representation& rho,
                                const EquivariantMap& f) {
  const std::vector<GroupElem> hol = edge_holonomies(mesh, rho);
  const std::vector<SymPoint> tgt = edge_targets(mesh, hol, f);
  std::vector<AlgElem> out;
  out.reserve(mesh.edges.size());
  for (size_t i = 0; i < mesh.edges.size(); ++i) out.push_back(mc_edge(f.values[mesh.edges[i].u], tgt[i]));
  return out;
}

namespace {

double energy_with(const CoverMesh& mesh, const std::vector<GroupElem>& hol, const EquivariantMap& f) {
  double e = 0.0;
  for (size_t i = 0; i < mesh.edges.size(); ++i) {
    const MeshEdge& ed = mesh.edges[i];
    const double d = dist(f.values[ed.u], act(hol[i], f.values[ed.v]));
    e += 0.5 * ed.w1 * d * d;
  }
  return e;
}

std::vector<AlgElem> tension_with(const CoverMesh& mesh, const std::vector<GroupElem>& hol,
                                  const std::vector<GroupElem>& hol_inv, const EquivariantMap& f) {
  const int n = static_cast<int>(f.values[0].rows());
  std::vector<AlgElem> tau(mesh.num_vertices(), Mat::Zero(n, n));
  for (size_t i = 0; i < mesh.edges.size(); ++i) {
    const MeshEdge& ed = mesh.edges[i];
    const AlgElem beta = mc_edge(f.values[ed.u], act(hol[i], f.values[ed.v]));
    tau[ed.u] += 2.0 * ed.w1 * beta;
    tau[ed.v] -= 2.0 * ed.w1 * (hol_inv[i] * beta * hol[i]);
  }
  return tau;
}

double tension_norm_of(const CoverMesh& mesh, const EquivariantMap& f, const std::vector<AlgElem>& tau) {
  double acc = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double t = norm_at(f.values[v], tau[v]);
    acc += t * t / mesh.vertices[v].w0;
  }
  return std::sqrt(acc);
}

std::vector<GroupElem> inverses(const std::vector<GroupElem>& g) {
  std::vector<GroupElem> out;
  out.reserve(g.size());
  for (const GroupElem& x : g) out.push_back(x.inverse());
  return out;
}

}  // namespace

double energy(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f) {
  return energy_with(mesh, edge_holonomies(mesh, rho), f);
}

std::vector<AlgElem> tension(const CoverMesh& mesh, const Representation& rho,
                             const EquivariantMap& f) {
  const std::vector<GroupElem> hol = edge_holonomies(mesh, rho);
  return tension_with(mesh, hol, inverses(hol), f);
}

double field_norm(const CoverMesh& mesh, const EquivariantMap& f, const std::vector<AlgElem>& field) {
  double acc = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double t = norm_at(f.values[v], field[v]);
    acc += mesh.vertices[v].w0 * t * t;
  }
  return std::sqrt(acc);
}

double tension_norm(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f) {
  return tension_norm_of(mesh, f, tension(mesh, rho, f));
}

FlowResult flow(const CoverMesh& mesh, const Representation& rho, const EquivariantMap& f0,
                const FlowParams& params) {
  if (!(params.tol > 0.0)) throw std::invalid_argument("flow: tolerance must be positive");
  check_map(mesh, rho.algebra, f0);
  const std::vector<GroupElem> hol = edge_holonomies(mesh, rho);
  const std::vector<GroupElem> hol_inv = inverses(hol);
  const int n = rho.algebra.n();
  const bool special = rho.algebra.is_special() && n > 1;
  const Preconditioner pre(mesh, n);
  const int nv = mesh.num_vertices();

  FlowResult res;
  EquivariantMap f = f0;
  if (special) {
    for (SymPoint& P : f.values) P = normalize_det(P);
  }
  const SymPoint base0 = f.values[0];
  double E = energy_with(mesh, hol, f);
  std::vector<AlgElem> tau = tension_with(mesh, hol, hol_inv, f);
  double tn = tension_norm_of(mesh, f, tau);
  std::vector<Frame> fr = frames(f);
  Eigen::VectorXd g = whitened_gradient(fr, tau);
  res.report.energy_history.push_back(E);
  std::vector<double> drift_hist{0.0};

  // Along an escaping minimizing sequence the tension decays like the energy.
  // At a minimizer it is small relative to the energy, or, at a zero-energy
  // minimizer, the energy is quadratic in it.
  auto converged = [&](double e, double t) {
    return t < params.tol && (t <= 1e-4 * e || e <= 1e-4 * t);
  };

  // L-BFGS in whitened coordinates; the frame change between iterates is
  // treated as the identity transport.
  constexpr size_t kMemory = 12;
  std::deque<Eigen::VectorXd> mem_s, mem_y;
  auto direction = [&](const Eigen::VectorXd& grad) {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(mem_s.size());
    for (int i = static_cast<int>(mem_s.size()) - 1; i >= 0; --i) {
      alpha[i] = mem_s[i].dot(q) / mem_y[i].dot(mem_s[i]);
      q -= alpha[i] * mem_y[i];
    }
    Eigen::VectorXd r = params.precondition ? pre.apply(q) : q;
    for (size_t i = 0; i < mem_s.size(); ++i) {
      const double b = mem_y[i].dot(r) / mem_y[i].dot(mem_s[i]);
      r += (alpha[i] - b) * mem_s[i];
    }
    return Eigen::VectorXd(-r);
  };

  int it = 0;
  for (; it < params.max_iter; ++it) {
    if (converged(E, tn)) {
      res.report.converged = true;
      break;
    }
    Eigen::VectorXd d = direction(g);
    if (special) project_traceless(d, n);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      mem_s.clear();
      mem_y.clear();
      d = direction(g);
      if (special) project_traceless(d, n);
      slope = g.dot(d);
      if (!(slope < 0.0)) {
        res.report.step_underflow = true;
        break;
      }
    }
    const std::vector<Mat> dY = unpack(d, nv, n);
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60 && !accepted; ++bt, t *= 0.5) {
      EquivariantMap fn = f;
      double En;
      std::vector<AlgElem> taun;
      double tnn;
      try {
        for (int v = 0; v < nv; ++v) {
          fn.values[v] = herm(fr[v].R * hermitian_exp(2.0 * t * dY[v]) * fr[v].R);
          if (special) fn.values[v] = normalize_det(fn.values[v]);
        }
        En = energy_with(mesh, hol, fn);
        if (!std::isfinite(En)) continue;
        taun = tension_with(mesh, hol, hol_inv, fn);
        tnn = tension_norm_of(mesh, fn, taun);
      } catch (const std::exception&) {
        continue;
      }
      // Near a minimizer the predicted decrease drops below rounding of E;
      // there a step must keep E flat and reduce the tension instead.
      const double noise = 1e-13 * std::max(1.0, std::abs(E));
      const bool ok = -slope > 100.0 * noise
                          ? En <= E + params.armijo * t * slope
                          : En <= E + noise && tnn <= (1.0 - 1e-4 * t) * tn;
      if (!ok) continue;
      res.report.max_energy_increase = std::max(res.report.max_energy_increase, En - E);
      std::vector<Frame> frn;
      try {
        frn = frames(fn);
      } catch (const std::exception&) {
        continue;
      }
      const Eigen::VectorXd gn = whitened_gradient(frn, taun);
      const Eigen::VectorXd s = t * d;
      const Eigen::VectorXd y = gn - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        mem_s.push_back(s);
        mem_y.push_back(y);
        if (mem_s.size() > kMemory) {
          mem_s.pop_front();
          mem_y.pop_front();
        }
      }
      f = std::move(fn);
      fr = std::move(frn);
      E = En;
      tau = std::move(taun);
      tn = tnn;
      g = gn;
      accepted = true;
    }
    if (!accepted) {
      res.report.step_underflow = true;
      break;
    }
    res.report.energy_history.push_back(E);
    drift_hist.push_back(drift_between(base0, f.values[0]));
    if (drift_hist.back() > params.radius) {
      ++it;
      break;
    }
  }
  if (!res.report.converged && converged(E, tn)) res.report.converged = true;

  res.report.energy = E;
  res.report.tension_norm = tn;
  res.report.iterations = it;
  res.report.drift = drift_hist.back();
  if (res.report.converged) {
    res.report.reductive_suspected = true;
  } else {
    const size_t q = drift_hist.size() - 1 - (drift_hist.size() - 1) / 4;
    const bool growing = drift_hist.size() > 4 && drift_hist.back() > drift_hist[q] + 1e-3;
    res.report.reductive_suspected = !(res.report.drift > params.radius || growing);
  }
  res.map = std::move(f);
  return res;
}

RepEnergy energy_of_rep(const CoverMesh& mesh, const Representation& rho, const FlowParams& params,
                        int restarts, unsigned long long seed) {
  RepEnergy out;
  out.best = flow(mesh, rho, constant_map(mesh, rho.algebra.n()), params);
  for (int r = 0; r < restarts; ++r) {
    FlowResult cand = flow(mesh, rho, random_map(mesh, rho.algebra, seed + 7919ULL * r), params);
    const bool better = cand.report.energy < out.best.report.energy - 1e-12 ||
                        (cand.report.converged && !out.best.report.converged &&
                         cand.report.energy <= out.best.report.energy + 1e-9);
    if (better) out.best = std::move(cand);
  }
  out.energy = out.best.report.energy;
  out.reductive_suspected = out.best.report.reductive_suspected;
  return out;
}

GroupElem basepoint_translation(const EquivariantMap& f, int v0) {
  return hpd_inv_sqrt(f.values.at(v0));
}

EquivariantMap normalize_basepoint(const EquivariantMap& f, int v0) {
  const GroupElem g = basepoint_translation(f, v0);
  EquivariantMap out;
  for (const SymPoint& P : f.values) out.values.push_back(act(g, P));
  return out;
}

double sup_distance(const EquivariantMap& a, const EquivariantMap& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) m = std::max(m, dist(a.values[i], b.values[i]));
  return m;
}

}  // namespace equivar
