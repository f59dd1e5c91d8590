#include "warplab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace warplab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kPi = std::numbers::pi;

// Assembles stiffness + weighted mass in one pass:
//   A = int w (grad_G u . grad_G v) + int w c(r,s) u v,
// load b = int w g(r,s) v.
struct Forms {
  SpMat stiffness;  // int w G^{-1} grad u . grad v
  int nn = 0;
};

SpMat assemble_stiffness(const MeridianMesh& mesh) {
  const int nn = mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(mesh.num_elements() * 36);
  mesh.for_each_qpoint([&](const MeridianMesh::QPoint& q) {
    double jit[4], det, r, s;
    mesh.element_geometry(q.elem, q.xi, q.eta, r, s, jit, det);
    double dN[6][2];
    p2_shape_grad(q.xi, q.eta, dN);
    const double inv_th2 = 1.0 / std::pow(mesh.profile().theta(q.r), 2);
    double gr[6], gs[6];
    for (int k = 0; k < 6; ++k) {
      gr[k] = jit[0] * dN[k][0] + jit[1] * dN[k][1];
      gs[k] = jit[2] * dN[k][0] + jit[3] * dN[k][1];
    }
    const auto& t = mesh.tri(q.elem);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        trips.emplace_back(t[a], t[b],
                           q.weight * (gr[a] * gr[b] + inv_th2 * gs[a] * gs[b]));
  });
  SpMat S(nn, nn);
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

SpMat assemble_mass(const MeridianMesh& mesh,
                    const std::function<double(double, double)>& coeff) {
  const int nn = mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(mesh.num_elements() * 36);
  mesh.for_each_qpoint([&](const MeridianMesh::QPoint& q) {
    double N[6];
    p2_shape(q.xi, q.eta, N);
    const double c = coeff(q.r, q.s) * q.weight;
    const auto& t = mesh.tri(q.elem);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        trips.emplace_back(t[a], t[b], c * N[a] * N[b]);
  });
  SpMat M(nn, nn);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Eigen::VectorXd assemble_load(const MeridianMesh& mesh,
                              const std::function<double(double, double)>& g) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  mesh.for_each_qpoint([&](const MeridianMesh::QPoint& q) {
    double N[6];
    p2_shape(q.xi, q.eta, N);
    const double c = g(q.r, q.s) * q.weight;
    const auto& t = mesh.tri(q.elem);
    for (int a = 0; a < 6; ++a) b[t[a]] += c * N[a];
  });
  return b;
}

// Load vector of int w phi(u_h) v for the current iterate.
Eigen::VectorXd assemble_semilinear_load(const MeridianMesh& mesh,
                                         const Eigen::VectorXd& f,
                                         const std::function<double(double)>& phi) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  mesh.for_each_qpoint([&](const MeridianMesh::QPoint& q) {
    double N[6];
    p2_shape(q.xi, q.eta, N);
    const auto& t = mesh.tri(q.elem);
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += N[k] * f[t[k]];
    const double c = phi(v) * q.weight;
    for (int a = 0; a < 6; ++a) b[t[a]] += c * N[a];
  });
  return b;
}

SpMat assemble_semilinear_mass(const MeridianMesh& mesh,
                               const Eigen::VectorXd& f,
                               const std::function<double(double)>& dphi) {
  const int nn = mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(mesh.num_elements() * 36);
  mesh.for_each_qpoint([&](const MeridianMesh::QPoint& q) {
    double N[6];
    p2_shape(q.xi, q.eta, N);
    const auto& t = mesh.tri(q.elem);
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += N[k] * f[t[k]];
    const double c = dphi(v) * q.weight;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        trips.emplace_back(t[a], t[b], c * N[a] * N[b]);
  });
  SpMat M(nn, nn);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

struct DofMap {
  std::vector<int> full_to_free;  // -1 for constrained
  std::vector<int> free_to_full;
};

DofMap make_dofmap(const MeridianMesh& mesh, bool constrain_inner) {
  DofMap map;
  map.full_to_free.assign(mesh.num_nodes(), -1);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.on_outer(i)) continue;
    if (constrain_inner && mesh.on_inner(i)) continue;
    map.full_to_free[i] = static_cast<int>(map.free_to_full.size());
    map.free_to_full.push_back(i);
  }
  return map;
}

SpMat restrict_matrix(const SpMat& A, const DofMap& map) {
  std::vector<Triplet> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int i = map.full_to_free[it.row()];
      const int j = map.full_to_free[it.col()];
      if (i >= 0 && j >= 0) trips.emplace_back(i, j, it.value());
    }
  }
  SpMat R(map.free_to_full.size(), map.free_to_full.size());
  R.setFromTriplets(trips.begin(), trips.end());
  return R;
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, const DofMap& map) {
  Eigen::VectorXd r(map.free_to_full.size());
  for (size_t i = 0; i < map.free_to_full.size(); ++i)
    r[i] = v[map.free_to_full[i]];
  return r;
}

// Jacobi-preconditioned CG with a direct LDLT fallback for indefinite
// systems (possible for K = 1 or strongly negative zero-order terms).
Eigen::VectorXd solve_linear(const SpMat& A, const Eigen::VectorXd& b,
                             const FemOptions& opt, std::string& solver_name,
                             double& achieved_residual) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(opt.linear_tol);
  cg.setMaxIterations(opt.linear_max_iter);
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() == Eigen::Success && std::isfinite(x.squaredNorm())) {
    solver_name = "cg-jacobi";
    achieved_residual = cg.error();
    return x;
  }
  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("linear solve failed (CG diverged, LDLT factorization "
                      "failed)");
  x = ldlt.solve(b);
  solver_name = "ldlt";
  achieved_residual = (A * x - b).norm() / std::max(b.norm(), 1e-300);
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ambient Hessian helpers

AmbientHessian ambient_hessian_from_meridian(const WarpingProfile& profile,
                                             double r, double s, double fr,
                                             double fs, double frr, double frs,
                                             double fss) {
  const double th = profile.theta(r);
  const double th1 = profile.d1(r);
  AmbientHessian H;
  H.rr = frr;
  H.rs = (frs - th1 / th * fs) / th;
  H.ss = (fss + th * th1 * fr) / (th * th);
  const double sn = std::sin(s);
  if (std::abs(sn) > 1e-7) {
    H.hoop = th1 / th * fr + std::cos(s) / sn * fs / (th * th);
  } else {
    // Axis limit: f_s -> 0 with f_s / sin s -> f_ss.
    H.hoop = th1 / th * fr + fss / (th * th);
  }
  return H;
}

AmbientHessian hessV_over_V(const WarpingProfile& profile, double r) {
  if (auto K = profile.spaceform_K()) {
    const double v = -static_cast<double>(*K);
    return {v, 0.0, v, v};
  }
  const double tang = profile.d2(r) / profile.theta(r);
  return {profile.third_over_first(r), 0.0, tang, tang};
}

// ---------------------------------------------------------------------------
// ScalarField

double ScalarField::eval(int elem, double xi, double eta) const {
  return mesh_->interpolate(
      std::span<const double>(f_.data(), f_.size()), elem, xi, eta);
}

void ScalarField::eval_recovered(int elem, double xi, double eta,
                                 double out[6]) const {
  if (!recovered_) throw SolverError("field derivatives not recovered yet");
  const Eigen::VectorXd* comps[6] = {&fr_, &fs_, &hrr_, &hrs_, &hss_, &hoop_};
  for (int c = 0; c < 6; ++c) {
    out[c] = mesh_->interpolate(
        std::span<const double>(comps[c]->data(), comps[c]->size()), elem, xi,
        eta);
  }
}

void ScalarField::eval_p2_gradient(int elem, double xi, double eta,
                                   double grad[2]) const {
  mesh_->gradient(std::span<const double>(f_.data(), f_.size()), elem, xi, eta,
                  grad);
}

double ScalarField::min_interior_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh_->num_nodes(); ++i) {
    if (mesh_->on_outer(i) || mesh_->on_inner(i)) continue;
    m = std::min(m, f_[i]);
  }
  return m;
}

double ScalarField::max_norm_hessian() const {
  if (!recovered_) throw SolverError("field derivatives not recovered yet");
  double m = 0.0;
  const int n = mesh_->n();
  for (int i = 0; i < mesh_->num_nodes(); ++i) {
    const AmbientHessian H = hessian_at_node(i);
    // Spectral bound of the symmetric operator: meridian 2x2 block plus the
    // hoop eigenvalue.
    const double tr = H.rr + H.ss;
    const double dd = std::sqrt(std::max(
        0.25 * (H.rr - H.ss) * (H.rr - H.ss) + H.rs * H.rs, 0.0));
    double spec = std::max(std::abs(0.5 * tr + dd), std::abs(0.5 * tr - dd));
    if (n > 1) spec = std::max(spec, std::abs(H.hoop));
    m = std::max(m, spec);
  }
  return m;
}

void ScalarField::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open field output: " + path);
  out.precision(17);
  out << "r,s,f,f_r,f_s\n";
  for (int i = 0; i < mesh_->num_nodes(); ++i) {
    out << mesh_->node_r(i) << ',' << mesh_->node_s(i) << ',' << f_[i] << ','
        << (recovered_ ? fr_[i] : 0.0) << ',' << (recovered_ ? fs_[i] : 0.0)
        << '\n';
  }
}

ScalarField field_from_nodal(std::shared_ptr<const MeridianMesh> mesh,
                             Eigen::VectorXd nodal) {
  if (nodal.size() != mesh->num_nodes())
    throw std::invalid_argument("field_from_nodal: size mismatch");
  ScalarField f;
  f.mesh_ = std::move(mesh);
  f.f_ = std::move(nodal);
  return f;
}

// ---------------------------------------------------------------------------
// Solvers

ScalarField solve_serrin(std::shared_ptr<const MeridianMesh> mesh,
                         const SourceSpec& source, const FemOptions& opt) {
  const MeridianMesh& m = *mesh;
  const auto Kopt = m.profile().spaceform_K();
  if (!Kopt || *Kopt == 0)
    throw SolverError("solve_serrin: spaceform profile with K = +-1 required");
  const double K = *Kopt;
  const int n = m.n();

  const SpMat S = assemble_stiffness(m);
  const SpMat M = assemble_mass(m, [](double, double) { return 1.0; });
  const SpMat A0 = S - (n + 1.0) * K * M;
  const DofMap map = make_dofmap(m, /*constrain_inner=*/false);
  const SpMat A0f = restrict_matrix(A0, map);

  ScalarField field;
  field.mesh_ = mesh;
  field.f_ = Eigen::VectorXd::Zero(m.num_nodes());

  // Initial guess: the linear solve with phi frozen at 1.
  const Eigen::VectorXd b1 =
      assemble_load(m, [](double, double) { return 1.0; });
  std::string solver;
  double lin_res = 0.0;
  Eigen::VectorXd xf = solve_linear(A0f, -restrict_vector(b1, map), opt,
                                    solver, lin_res);
  for (size_t i = 0; i < map.free_to_full.size(); ++i)
    field.f_[map.free_to_full[i]] = xf[i];

  // Damped Newton on  F(f) = A0 f + int w phi(f) v.
  const double scale = b1.norm();
  double res_norm = 0.0;
  int it = 0;
  for (; it < opt.newton_max; ++it) {
    const Eigen::VectorXd P = assemble_semilinear_load(m, field.f_, source.phi);
    const Eigen::VectorXd F = restrict_vector(A0 * field.f_ + P, map);
    res_norm = F.norm() / scale;
    if (res_norm < opt.newton_tol) break;
    const SpMat Jphi = assemble_semilinear_mass(m, field.f_, source.dphi);
    const SpMat Jf = restrict_matrix(A0 + Jphi, map);
    const Eigen::VectorXd delta = solve_linear(Jf, -F, opt, solver, lin_res);
    double damp = 1.0;
    Eigen::VectorXd base = field.f_;
    for (int half = 0; half < 12; ++half) {
      for (size_t i = 0; i < map.free_to_full.size(); ++i)
        field.f_[map.free_to_full[i]] = base[map.free_to_full[i]] + damp * delta[i];
      const Eigen::VectorXd Pn =
          assemble_semilinear_load(m, field.f_, source.phi);
      const double rn = restrict_vector(A0 * field.f_ + Pn, map).norm() / scale;
      if (rn < res_norm || damp < 1e-3) break;
      damp *= 0.5;
    }
  }
  if (res_norm >= opt.newton_tol) {
    // One more residual evaluation to report the final state.
    const Eigen::VectorXd P = assemble_semilinear_load(m, field.f_, source.phi);
    res_norm = restrict_vector(A0 * field.f_ + P, map).norm() / scale;
    if (res_norm >= opt.newton_tol)
      throw SolverError("solve_serrin: Newton did not converge (residual " +
                        std::to_string(res_norm) + ")");
  }
  field.stats_.newton_iterations = it;
  field.stats_.nonlinear_residual = res_norm;
  field.stats_.linear_residual = lin_res;
  field.stats_.linear_solver = solver;
  return field;
}

ScalarField solve_serrin(const MeridianDomain& domain, const SourceSpec& source,
                         double h, const FemOptions& opt) {
  auto mesh = std::make_shared<MeridianMesh>(build_mesh(domain, h));
  return solve_serrin(std::move(mesh), source, opt);
}

ScalarField solve_warped_torsion(std::shared_ptr<const MeridianMesh> mesh,
                                 const FemOptions& opt) {
  const MeridianMesh& m = *mesh;
  const WarpingProfile& prof = m.profile();
  const int n = m.n();

  if (opt.require_hypotheses && !prof.spaceform_K()) {
    std::vector<double> grid;
    const double rmax = m.domain().graph().max_value();
    for (int i = 1; i <= 64; ++i) grid.push_back(rmax * i / 65.0);
    const HypothesisReport rep = prof.check_hypotheses(grid);
    if (!rep.all_pass())
      throw SolverError(
          "solve_warped_torsion: profile fails the structure hypotheses");
  }

  const SpMat S = assemble_stiffness(m);
  const SpMat Mc = assemble_mass(
      m, [&](double r, double) { return prof.lap_V_over_V(r); });
  const SpMat A = S + Mc;
  const bool has_inner =
      m.domain().topology() == Topology::HomologousToInnerSlice;
  const DofMap map = make_dofmap(m, /*constrain_inner=*/has_inner);

  // Dirichlet lift: c0 on the inner slice.
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(m.num_nodes());
  if (has_inner) {
    const double c0 = -prof.theta(0.0) / ((n + 1.0) * prof.d2(0.0));
    for (int i : m.inner_nodes()) lift[i] = c0;
  }

  const Eigen::VectorXd b1 =
      assemble_load(m, [](double, double) { return 1.0; });
  const Eigen::VectorXd rhs = restrict_vector(-b1 - A * lift, map);
  const SpMat Af = restrict_matrix(A, map);

  ScalarField field;
  field.mesh_ = mesh;
  field.f_ = lift;
  std::string solver;
  double lin_res = 0.0;
  const Eigen::VectorXd xf = solve_linear(Af, rhs, opt, solver, lin_res);
  for (size_t i = 0; i < map.free_to_full.size(); ++i)
    field.f_[map.free_to_full[i]] += xf[i];
  field.stats_.newton_iterations = 1;
  field.stats_.nonlinear_residual = 0.0;
  field.stats_.linear_residual = lin_res;
  field.stats_.linear_solver = solver;
  return field;
}

ScalarField solve_warped_torsion(const MeridianDomain& domain, double h,
                                 const FemOptions& opt) {
  auto mesh = std::make_shared<MeridianMesh>(build_mesh(domain, h));
  return solve_warped_torsion(std::move(mesh), opt);
}

// ---------------------------------------------------------------------------
// Patch recovery

namespace {

// Collects the nodes of all elements adjacent to the given nodes.
void extend_patch(const MeridianMesh& mesh, std::set<int>& nodes) {
  std::set<int> grown = nodes;
  for (int v : nodes) {
    for (int e : mesh.node_elements(v)) {
      const auto& t = mesh.tri(e);
      for (int k = 0; k < 6; ++k) grown.insert(t[k]);
    }
  }
  nodes.swap(grown);
}

}  // namespace

namespace {

struct PatchFit {
  // First and second derivatives of the fitted surrogate with respect to the
  // fit coordinates (a, b) at the node.
  double fa, fb, faa, fab, fbb;
  double g;  // ball path only: fx / x (stable through the axis)
};

// Least squares with per-column normalization; returns coefficients in the
// un-normalized column basis.
Eigen::VectorXd scaled_lsq(Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
  const int cols = static_cast<int>(A.cols());
  Eigen::VectorXd scale(cols);
  for (int k = 0; k < cols; ++k) {
    scale[k] = std::max(A.col(k).cwiseAbs().maxCoeff(), 1e-300);
    A.col(k) /= scale[k];
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
  for (int k = 0; k < cols; ++k) c[k] /= scale[k];
  return c;
}

// Ball path: fit coordinates (x, z) = (r sin s, r cos s) with the even-in-x
// basis u^a z^b, u = x^2, spanning the full local cubic space away from the
// axis while enforcing the axial parity of axisymmetric functions. x is kept
// absolute (the parity is about x = 0, not about the node), z is centred.
PatchFit fit_patch_cartesian_even(const MeridianMesh& mesh,
                                  const std::set<int>& patch,
                                  const Eigen::VectorXd& values, double x0,
                                  double z0) {
  static const int ea[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};  // powers of u
  static const int eb[10] = {0, 1, 2, 3, 0, 1, 2, 0, 1, 0};  // powers of z
  double sx = 1e-14, sz = 1e-14;
  for (int p : patch) {
    const double r = mesh.node_r(p), s = mesh.node_s(p);
    sx = std::max(sx, std::abs(r * std::sin(s)));
    sz = std::max(sz, std::abs(r * std::cos(s) - z0));
  }
  const int rows = static_cast<int>(patch.size());
  Eigen::MatrixXd A(rows, 10);
  Eigen::VectorXd rhs(rows);
  int row = 0;
  for (int p : patch) {
    const double r = mesh.node_r(p), s = mesh.node_s(p);
    const double u = std::pow(r * std::sin(s) / sx, 2);
    const double z = (r * std::cos(s) - z0) / sz;
    for (int k = 0; k < 10; ++k)
      A(row, k) = std::pow(u, ea[k]) * std::pow(z, eb[k]);
    rhs(row) = values[p];
    ++row;
  }
  const Eigen::VectorXd c = scaled_lsq(A, rhs);
  const double xb = x0 / sx, u0 = xb * xb;

  // Scaled derivatives at the node (z centred there): P(u, z),
  // d/dx = 2 x d/du.
  auto du = [&](int order_z) {  // dP/du terms with the given z power
    double acc = 0.0;
    for (int k = 0; k < 10; ++k)
      if (eb[k] == order_z && ea[k] >= 1)
        acc += c[k] * ea[k] * std::pow(u0, ea[k] - 1);
    return acc;
  };
  const double Pu = du(0);
  double Puu = 0.0;
  for (int k = 0; k < 10; ++k)
    if (eb[k] == 0 && ea[k] >= 2)
      Puu += c[k] * ea[k] * (ea[k] - 1) * std::pow(u0, ea[k] - 2);
  double Pz = 0.0, Pzz = 0.0;
  for (int k = 0; k < 10; ++k) {
    if (eb[k] == 1) Pz += c[k] * std::pow(u0, ea[k]);
    if (eb[k] == 2) Pzz += 2.0 * c[k] * std::pow(u0, ea[k]);
  }
  const double Puz = du(1);

  PatchFit out{};
  out.g = 2.0 * Pu / (sx * sx);                          // f_x / x
  out.fa = out.g * x0;                                   // f_x
  out.fb = Pz / sz;                                      // f_z
  out.faa = (2.0 * Pu + 4.0 * u0 * Puu) / (sx * sx);     // f_xx
  out.fab = 2.0 * xb * Puz / (sx * sz);                  // f_xz
  out.fbb = Pzz / (sz * sz);                             // f_zz
  return out;
}

// Slab path: fit coordinates (r, v) = (r, cos s), full cubic basis.
PatchFit fit_patch_polar_v(const MeridianMesh& mesh, const std::set<int>& patch,
                           const Eigen::VectorXd& values, double r0,
                           double v0) {
  double sr = 1e-14, sv = 1e-14;
  for (int p : patch) {
    sr = std::max(sr, std::abs(mesh.node_r(p) - r0));
    sv = std::max(sv, std::abs(std::cos(mesh.node_s(p)) - v0));
  }
  const int rows = static_cast<int>(patch.size());
  Eigen::MatrixXd A(rows, 10);
  Eigen::VectorXd rhs(rows);
  int row = 0;
  for (int p : patch) {
    const double a = (mesh.node_r(p) - r0) / sr;
    const double b = (std::cos(mesh.node_s(p)) - v0) / sv;
    A(row, 0) = 1.0;
    A(row, 1) = a;
    A(row, 2) = b;
    A(row, 3) = a * a;
    A(row, 4) = a * b;
    A(row, 5) = b * b;
    A(row, 6) = a * a * a;
    A(row, 7) = a * a * b;
    A(row, 8) = a * b * b;
    A(row, 9) = b * b * b;
    rhs(row) = values[p];
    ++row;
  }
  const Eigen::VectorXd c = scaled_lsq(A, rhs);
  PatchFit out{};
  out.fa = c[1] / sr;
  out.fb = c[2] / sv;
  out.faa = 2.0 * c[3] / (sr * sr);
  out.fab = c[4] / (sr * sv);
  out.fbb = 2.0 * c[5] / (sv * sv);
  out.g = 0.0;
  return out;
}

}  // namespace

void recover_derivatives(ScalarField& field) {
  const MeridianMesh& mesh = field.mesh();
  const WarpingProfile& prof = mesh.profile();
  const int nn = mesh.num_nodes();
  field.fr_.resize(nn);
  field.fs_.resize(nn);
  field.hrr_.resize(nn);
  field.hrs_.resize(nn);
  field.hss_.resize(nn);
  field.hoop_.resize(nn);

  const bool origin_domain = mesh.domain().theta0() < 1e-12;

  for (int v = 0; v < nn; ++v) {
    std::set<int> patch{v};
    extend_patch(mesh, patch);
    const bool boundary = mesh.on_outer(v) || mesh.on_inner(v);
    if (patch.size() < 18 || boundary) extend_patch(mesh, patch);
    if (patch.size() < 14) extend_patch(mesh, patch);

    const double r = mesh.node_r(v), s = mesh.node_s(v);
    const double sn = std::sin(s), cs = std::cos(s);
    const double th = prof.theta(r), th1 = prof.d1(r);

    if (origin_domain) {
      const double x0 = r * sn, z0 = r * cs;
      const PatchFit fit =
          fit_patch_cartesian_even(mesh, patch, field.values(), x0, z0);
      const double fx = fit.fa, fz = fit.fb, g = fit.g;
      field.fr_[v] = sn * fx + cs * fz;
      field.fs_[v] = r * (cs * fx - sn * fz);

      // Covariant correction of the flat-Cartesian Hessian: the meridian
      // metric dr^2 + theta^2 ds^2 differs from the flat polar metric by
      //   T^r_ss = r - theta theta' =: tau1,  T^s_rs = theta'/theta - 1/r.
      double tau1 = 0.0, tau2 = 0.0;
      if (r > 1e-10) {
        tau1 = r - th * th1;
        tau2 = (th1 * r - th) / (th * r);
      }
      double Txx = 0, Txz = 0, Tzz = 0;  // T~^x_ab
      double Zxx = 0, Zxz = 0, Zzz = 0;  // T~^z_ab
      if (r > 1e-10) {
        const double ss_xx = cs * cs / (r * r);
        const double ss_xz = -sn * cs / (r * r);
        const double ss_zz = sn * sn / (r * r);
        const double rs_xx = 2.0 * sn * cs / r;
        const double rs_xz = (cs * cs - sn * sn) / r;
        const double rs_zz = -2.0 * sn * cs / r;
        Txx = sn * tau1 * ss_xx + r * cs * tau2 * rs_xx;
        Txz = sn * tau1 * ss_xz + r * cs * tau2 * rs_xz;
        Tzz = sn * tau1 * ss_zz + r * cs * tau2 * rs_zz;
        Zxx = cs * tau1 * ss_xx - r * sn * tau2 * rs_xx;
        Zxz = cs * tau1 * ss_xz - r * sn * tau2 * rs_xz;
        Zzz = cs * tau1 * ss_zz - r * sn * tau2 * rs_zz;
      }
      const double Hxx = fit.faa - Txx * fx - Zxx * fz;
      const double Hxz = fit.fab - Txz * fx - Zxz * fz;
      const double Hzz = fit.fbb - Tzz * fx - Zzz * fz;

      // Frame vectors in Cartesian components: e1 = (sin s, cos s),
      // e2 = (r cos s, -r sin s)/theta; r/theta -> 1 at the origin.
      const double rot = (r > 1e-10) ? r / th : 1.0;
      const double e2x = rot * cs, e2z = -rot * sn;
      field.hrr_[v] = sn * sn * Hxx + 2 * sn * cs * Hxz + cs * cs * Hzz;
      field.hrs_[v] =
          sn * e2x * Hxx + (sn * e2z + cs * e2x) * Hxz + cs * e2z * Hzz;
      field.hss_[v] = e2x * e2x * Hxx + 2 * e2x * e2z * Hxz + e2z * e2z * Hzz;
      // hoop = g [ (theta'/theta) r sin^2 s + r^2 cos^2 s / theta^2 ]
      //        - f_z cos s tau1 / theta^2.
      double bracket;
      if (r > 1e-10) {
        bracket = th1 / th * r * sn * sn + r * r * cs * cs / (th * th);
      } else {
        bracket = 1.0;
      }
      field.hoop_[v] = g * bracket - fz * cs * tau1 / std::max(th * th, 1e-300);
    } else {
      const PatchFit fit =
          fit_patch_polar_v(mesh, patch, field.values(), r, cs);
      const double fr = fit.fa, fv = fit.fb;
      field.fr_[v] = fr;
      field.fs_[v] = -sn * fv;
      field.hrr_[v] = fit.faa;
      field.hrs_[v] = -sn * (fit.fab - th1 / th * fv) / th;
      field.hss_[v] =
          (sn * sn * fit.fbb - cs * fv + th * th1 * fr) / (th * th);
      field.hoop_[v] = th1 / th * fr - cs * fv / (th * th);
    }
  }
  field.recovered_ = true;
}

std::vector<double> neumann_trace(const ScalarField& field,
                                  const BoundarySurface& surface) {
  if (!field.recovered())
    throw SolverError("neumann_trace: call recover_derivatives first");
  const MeridianMesh& mesh = field.mesh();
  std::vector<double> out(surface.nodes().size());
  for (size_t i = 0; i < surface.nodes().size(); ++i) {
    const BoundaryNode& nd = surface.nodes()[i];
    int elem;
    double xi, eta;
    // Boundary points sit on the mesh skin; nudge inward for robustness.
    const double r = nd.u * (1.0 - 1e-13);
    if (!mesh.locate(r, nd.s, elem, xi, eta))
      throw SolverError("neumann_trace: boundary point not located in mesh");
    double d[6];
    field.eval_recovered(elem, xi, eta, d);
    out[i] = d[0] * nd.nu_r + d[1] * nd.nu_s;
  }
  return out;
}

}  // namespace warplab
