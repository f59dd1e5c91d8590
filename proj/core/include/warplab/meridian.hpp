#pragma once

// Axisymmetric domains in the (r, s) half-plane, s the polar angle on S^n.
// A domain is the region { 0 <= r <= u(s) } below a graph M = { r = u(s) };
// when theta(0) > 0 the line { r = 0 } is an inner boundary hypersurface
// (M homologous to the inner slice), when theta(0) = 0 it degenerates to the
// origin and M alone bounds (null-homologous).
//
// Rotation-invariant integrals reduce to weighted meridian integrals with
//   volume weight   w(r,s) = |S^{n-1}| theta(r)^n  sin^{n-1}(s),
//   area element on M: dA = |S^{n-1}| theta(u)^{n-1} sin^{n-1}(s) J ds,
//   J = sqrt(u'^2 + theta(u)^2).
//
// Curvature sign convention: bar∇_Y Z = ∇_Y Z - A(Y,Z) nu with outward nu,
// so coordinate slices in growing theta have H1 = theta'/theta > 0.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "warplab/profile.hpp"

namespace warplab {

enum class Topology { NullHomologous, HomologousToInnerSlice };

std::string to_string(Topology t);

// Boundary graph u(s) = r0 + sum_k coef[k-1] cos(k s) on [0, pi].
struct GraphSpec {
  double r0 = 0.0;
  std::vector<double> coef;

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
  double min_value() const;
  double max_value() const;
  bool is_slice() const;
};

// Generic C^2 graph over [0, pi]; used for level-set contours.
struct GraphFn {
  std::function<double(double)> value, d1, d2;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MeridianDomain {
 public:
  const WarpingProfile& profile() const { return *profile_; }
  const GraphSpec& graph() const { return graph_; }
  Topology topology() const { return topology_; }
  int n() const { return profile_->n(); }
  double interior_ball_estimate() const { return rho_; }
  double beta2() const { return beta2_; }

  // Closed forms of the radial fibre integrals: for any s,
  //   int_0^{u} theta' theta^n dr = (theta(u)^{n+1} - theta(0)^{n+1})/(n+1).
  double integral_V() const;       // int_Omega theta'
  double volume() const;           // int_Omega 1
  double theta0() const;           // theta(0) (inner slice radius; 0 if point)

  // Weighted volume integral of a rotation-invariant integrand g(r, s) by
  // tensorized Gauss quadrature (independent of any FEM mesh).
  double volume_integral(const std::function<double(double, double)>& g,
                         int panels_s = 64, int panels_r = 64) const;

  friend MeridianDomain build_domain(const WarpingProfile&, const GraphSpec&,
                                     Topology, double);

 private:
  const WarpingProfile* profile_ = nullptr;
  GraphSpec graph_;
  Topology topology_;
  double rho_ = 0.0;
  double beta2_ = 1.0;
};

// Validates the spec against the profile (range, topology, hemisphere cap)
// and estimates the interior rolling-ball radius. beta2 is carried as
// metadata only.
MeridianDomain build_domain(const WarpingProfile& profile,
                            const GraphSpec& graph, Topology topology,
                            double beta2 = 1.0);

// Convenience: geodesic ball of radius R about the origin of a spaceform.
MeridianDomain build_ball(const WarpingProfile& profile, double R);

// Diagnostic lower estimate of the interior rolling-ball radius
// (distance-to-boundary maximization capped by the curvature-ball radius).
double interior_ball_radius(const MeridianDomain& domain);

// ---------------------------------------------------------------------------
// Boundary geometry

struct BoundaryNode {
  double s;
  double u, du, ddu;        // graph value and derivatives at s
  double theta, V;          // theta(u), theta'(u)
  double nu_r, nu_s;        // outward unit normal (contravariant components)
  double radial_cos;        // <partial_r, nu>
  double support;           // <theta partial_r, nu>
  double kappa_m, kappa_p;  // meridian / rotational principal curvatures
  double H1;                // (kappa_m + (n-1) kappa_p)/n
  double ringA_sq;          // (n-1)/n (kappa_m - kappa_p)^2
  double dA;                // quadrature weight of the surface measure
};

class BoundarySurface {
 public:
  const std::vector<BoundaryNode>& nodes() const { return nodes_; }
  int n() const { return n_; }
  double area() const;
  double integrate(std::span<const double> nodal_values) const;
  double integrate(const std::function<double(const BoundaryNode&)>& f) const;
  double min_H1() const;
  double max_principal_curvature() const;

  friend BoundarySurface make_surface(const WarpingProfile&, const GraphFn&,
                                      int, int);

 private:
  int n_ = 2;
  std::vector<BoundaryNode> nodes_;
};

// Gauss nodes on [0, pi]: `panels` panels with a fixed 8-point rule each.
BoundarySurface make_surface(const WarpingProfile& profile, const GraphFn& u,
                             int n, int panels);
BoundarySurface boundary_geometry(const MeridianDomain& domain,
                                  int panels = 128);

GraphFn graph_fn(const GraphSpec& g);
GraphFn graph_fn(std::shared_ptr<CubicSpline> spline);

// ---------------------------------------------------------------------------
// Meridian mesh (isoparametric P2 triangles on a mapped structured grid)

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MeridianMesh {
 public:
  struct QPoint {
    double r, s;       // physical position
    double weight;     // quadrature weight x |J| x w(r,s): integrates f dVol
    int elem;
    double xi, eta;    // reference coordinates
  };

  const MeridianDomain& domain() const { return *domain_; }
  const WarpingProfile& profile() const { return domain_->profile(); }
  int n() const { return domain_->n(); }
  double h() const { return h_; }
  int num_nodes() const { return static_cast<int>(node_r_.size()); }
  int num_elements() const { return static_cast<int>(tris_.size()); }
  double node_r(int i) const { return node_r_[i]; }
  double node_s(int i) const { return node_s_[i]; }
  const std::array<int, 6>& tri(int e) const { return tris_[e]; }
  bool on_outer(int node) const { return flag_[node] & 1; }
  bool on_inner(int node) const { return flag_[node] & 2; }
  const std::vector<int>& outer_nodes() const { return outer_nodes_; }
  const std::vector<int>& inner_nodes() const { return inner_nodes_; }
  const std::vector<int>& node_elements(int node) const {
    return node_tris_[node];
  }

  double weight(double r, double s) const;  // |S^{n-1}| theta^n sin^{n-1}

  // Walks all element quadrature points (7-point degree-5 rule, interior
  // points only).
  void for_each_qpoint(const std::function<void(const QPoint&)>& fn) const;

  // Quadrature of a P2 nodal field over the weighted volume.
  double integrate(std::span<const double> nodal_values) const;
  double integrate(const std::function<double(double, double)>& g) const;

  // P2 interpolation helpers. Locate returns false outside the mesh.
  bool locate(double r, double s, int& elem, double& xi, double& eta) const;
  double interpolate(std::span<const double> nodal, int elem, double xi,
                     double eta) const;
  // Physical gradient (d/dr, d/ds) of a P2 nodal field inside an element.
  void gradient(std::span<const double> nodal, int elem, double xi, double eta,
                double grad[2]) const;

  // Element geometry at a reference point.
  void element_geometry(int elem, double xi, double eta, double& r, double& s,
                        double jac_inv_t[4], double& det) const;

  void write_text(const std::string& path) const;

  friend MeridianMesh build_mesh(const MeridianDomain&, double);

 private:
  const MeridianDomain* domain_ = nullptr;
  int Nr_ = 0, Ns_ = 0;
  double h_ = 0.0;
  std::vector<double> node_r_, node_s_;
  std::vector<std::array<int, 6>> tris_;
  std::vector<char> flag_;
  std::vector<int> outer_nodes_, inner_nodes_;
  std::vector<std::vector<int>> node_tris_;
  int fine_cols_ = 0;
  int fine_id(int i, int j) const { return i * fine_cols_ + j; }
};

MeridianMesh build_mesh(const MeridianDomain& domain, double h);

// P2 reference shape functions and derivatives at (xi, eta).
void p2_shape(double xi, double eta, double N[6]);
void p2_shape_grad(double xi, double eta, double dN[6][2]);

}  // namespace warplab
