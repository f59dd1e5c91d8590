#pragma once

// Weighted P2 Galerkin solver in the meridian plane. For rotation-invariant
// fields the ambient operators reduce to the 2-D weighted forms with
//   w(r,s) = |S^{n-1}| theta^n sin^{n-1}(s),   G^{-1} = diag(1, theta^{-2}):
//   lap f  = (1/w) div( w G^{-1} grad f ).
//
// Ambient Hessian of a rotation-invariant f in the orthonormal frame
// (e_r = partial_r, e_s = theta^{-1} partial_s, orbit directions):
//   H_rr  = f_rr
//   H_rs  = (f_rs - (theta'/theta) f_s)/theta
//   H_ss  = (f_ss + theta theta' f_r)/theta^2
//   hoop  = (theta'/theta) f_r + cot(s) f_s / theta^2   [(n-1)-fold]
// so that  lap f = H_rr + H_ss + (n-1) hoop.

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "warplab/meridian.hpp"
#include "warplab/source.hpp"

namespace warplab {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FemOptions {
  double newton_tol = 1e-10;  // relative nonlinear residual
  int newton_max = 30;
  double linear_tol = 1e-12;
  int linear_max_iter = 40000;
  bool require_hypotheses = true;  // torsion: verify (H1)-(H5) first
};

// Symmetric ambient Hessian of a rotation-invariant field at a point, in the
// orthonormal frame; hoop is the (n-1)-fold orbit eigenvalue.
struct AmbientHessian {
  double rr = 0, rs = 0, ss = 0, hoop = 0;

  double trace(int n) const { return rr + ss + (n - 1) * hoop; }
  double norm_sq(int n) const {
    return rr * rr + 2 * rs * rs + ss * ss + (n - 1) * hoop * hoop;
  }
  // Removes the (n+1)-dimensional trace part.
  AmbientHessian traceless(int n) const {
    const double t = trace(n) / (n + 1.0);
    return {rr - t, rs, ss - t, hoop - t};
  }
  AmbientHessian operator-(const AmbientHessian& o) const {
    return {rr - o.rr, rs - o.rs, ss - o.ss, hoop - o.hoop};
  }
  AmbientHessian scaled(double a) const {
    return {a * rr, a * rs, a * ss, a * hoop};
  }
};

AmbientHessian ambient_hessian_from_meridian(const WarpingProfile& profile,
                                             double r, double s, double fr,
                                             double fs, double frr, double frs,
                                             double fss);

// Hess V / V for V = theta' (diagonal: radial theta'''/theta', tangential
// theta''/theta in every tangential direction).
AmbientHessian hessV_over_V(const WarpingProfile& profile, double r);

class ScalarField {
 public:
  const MeridianMesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& values() const { return f_; }
  double value(int node) const { return f_[node]; }

  bool recovered() const { return recovered_; }
  // Recovered nodal coordinate gradient (d/dr, d/ds) and ambient-frame
  // Hessian components.
  const Eigen::VectorXd& fr() const { return fr_; }
  const Eigen::VectorXd& fs() const { return fs_; }
  const Eigen::VectorXd& hrr() const { return hrr_; }
  const Eigen::VectorXd& hrs() const { return hrs_; }
  const Eigen::VectorXd& hss() const { return hss_; }
  const Eigen::VectorXd& hoop() const { return hoop_; }
  AmbientHessian hessian_at_node(int node) const {
    return {hrr_[node], hrs_[node], hss_[node], hoop_[node]};
  }

  // P2 interpolation at a located reference point.
  double eval(int elem, double xi, double eta) const;
  // Interpolated recovered fields: fr, fs, hrr, hrs, hss, hoop.
  void eval_recovered(int elem, double xi, double eta, double out[6]) const;
  // Exact P2 gradient of the discrete field (used by the level-set flow).
  void eval_p2_gradient(int elem, double xi, double eta, double grad[2]) const;

  double min_interior_value() const;
  double max_norm_hessian() const;  // max spectral estimate over nodes

  struct SolveStats {
    int newton_iterations = 0;
    double nonlinear_residual = 0.0;
    double linear_residual = 0.0;
    std::string linear_solver;
  };
  const SolveStats& stats() const { return stats_; }

  // Nodal CSV dump: r, s, f, f_r, f_s.
  void write_csv(const std::string& path) const;

  friend ScalarField solve_serrin(std::shared_ptr<const MeridianMesh>,
                                  const SourceSpec&, const FemOptions&);
  friend ScalarField solve_warped_torsion(std::shared_ptr<const MeridianMesh>,
                                          const FemOptions&);
  friend ScalarField field_from_nodal(std::shared_ptr<const MeridianMesh>,
                                      Eigen::VectorXd);
  friend void recover_derivatives(ScalarField&);

  std::shared_ptr<const MeridianMesh> mesh_ptr() const { return mesh_; }

 private:
  std::shared_ptr<const MeridianMesh> mesh_;
  Eigen::VectorXd f_;
  Eigen::VectorXd fr_, fs_, hrr_, hrs_, hss_, hoop_;
  bool recovered_ = false;
  SolveStats stats_;
};

// Semilinear spaceform problem  lap f + (n+1) K f = phi(f),  f|_M = 0.
ScalarField solve_serrin(std::shared_ptr<const MeridianMesh> mesh,
                         const SourceSpec& source, const FemOptions& opt = {});
ScalarField solve_serrin(const MeridianDomain& domain, const SourceSpec& source,
                         double h, const FemOptions& opt = {});

// Warped torsion problem  lap f - (lap V/V) f = 1,  f|_M = 0 and
// f = c0 = -theta(0)/((n+1) theta''(0)) on the inner slice when present.
ScalarField solve_warped_torsion(std::shared_ptr<const MeridianMesh> mesh,
                                 const FemOptions& opt = {});
ScalarField solve_warped_torsion(const MeridianDomain& domain, double h,
                                 const FemOptions& opt = {});

// Wraps given nodal values (e.g. an analytic field sampled at the nodes).
ScalarField field_from_nodal(std::shared_ptr<const MeridianMesh> mesh,
                             Eigen::VectorXd nodal);

// Superconvergent patch recovery of nodal derivatives by local least squares
// in symmetry-adapted coordinates: for domains containing the coordinate
// origin (theta(0) = 0) the fit runs in meridian Cartesian coordinates
// (x, z) = (r sin s, r cos s) with an even-in-x basis; otherwise in
// (r, cos s). Either choice follows the smooth structure of axisymmetric
// functions, so no 1/theta or 1/sin s factor ever amplifies the fit noise.
void recover_derivatives(ScalarField& field);

// Neumann trace f_nu = <grad f, nu> sampled at the surface quadrature nodes.
std::vector<double> neumann_trace(const ScalarField& field,
                                  const BoundarySurface& surface);

}  // namespace warplab
