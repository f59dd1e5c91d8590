#pragma once

// Warping-function algebra for rotationally symmetric ambient metrics
//   g = dr^2 + theta(r)^2 sigma   on  [0, rbar) x S^n.
//
// Closed-form kinds: sphere (theta = sin r), hyperbolic (sinh r), euclidean
// (r). Implicit kinds are defined through the first-order relation
//   theta' = sqrt(W(theta)),
//   W(theta) = 1 + kappa theta^2 - 2 m theta^{1-n} [+ q^2 theta^{2-2n}],
// started at the horizon theta(0) = largest root of W with W increasing.
// Higher derivatives follow from the chain rule, never from numerical
// differentiation:
//   theta''  = W'(theta)/2,   theta''' = W''(theta)/2 * theta'.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "warplab/numerics.hpp"

namespace warplab {

enum class ProfileKind {
  SpaceformSphere,
  SpaceformHyperbolic,
  Euclidean,
  Schwarzschild,
  ReissnerNordstrom,
  Tabulated,
};

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

struct ProfileParams {
  int n = 2;            // sphere dimension of the fiber
  double kappa = 0.0;   // in {-1, 0, 1} for implicit kinds
  double mass = 0.0;    // m >= 0
  double charge = 0.0;  // q >= 0 (Reissner-Nordstrom)
  double rbar = 0.0;    // 0 = kind default (implicit kinds: radius at theta cap)
  double theta_cap = 4.0;  // implicit kinds stop when theta reaches this
  // Tabulated kind: samples of (r, theta, theta', theta'', theta''').
  std::vector<double> tab_r, tab_theta, tab_d1, tab_d2, tab_d3;
};

struct NoHorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidParameters : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfDomain : std::domain_error {
  using std::domain_error::domain_error;
};

// All five scalars derived from the profile at one radius. Ricci eigenvalues
// are per unit metric; the Hessian-of-V spherical coefficient is the sigma
// coefficient of Hess(V)/V, the radial one its dr x dr coefficient.
struct AmbientCurvature {
  double ricci_radial;       // -n theta''/theta
  double ricci_tangential;   // (n-1)(1-theta'^2)/theta^2 - theta''/theta
  double hessV_spherical;    // theta theta''          (per unit sigma)
  double hessV_radial;       // theta'''/theta'
  double lapV_over_V;        // theta'''/theta' + n theta''/theta
  bool hessian_defined;      // false where theta' = 0 has no analytic limit
};

struct HypothesisReport {
  struct Item {
    std::string hypothesis;  // "H1".."H5"
    bool pass;
    double witness_r;  // where the check is decided (worst point)
    double value;      // the decisive value at the witness
  };
  std::vector<Item> items;
  bool all_pass() const;
};

class WarpingProfile {
 public:
  static WarpingProfile make(ProfileKind kind, const ProfileParams& params);

  ProfileKind kind() const { return kind_; }
  int n() const { return params_.n; }
  double rbar() const { return rbar_; }
  double kappa() const { return params_.kappa; }
  double mass() const { return params_.mass; }
  double charge() const { return params_.charge; }

  // theta^{(order)}(r), order in {0,1,2,3}.
  double eval(double r, int order) const;
  double theta(double r) const { return eval(r, 0); }
  double d1(double r) const { return eval(r, 1); }
  double d2(double r) const { return eval(r, 2); }
  double d3(double r) const { return eval(r, 3); }

  // theta'''/theta' through its analytic limit where available (all closed
  // form and implicit kinds). For tabulated profiles the plain quotient is
  // used and `third_over_first_defined` reports whether it is reliable.
  double third_over_first(double r) const;
  bool third_over_first_defined(double r) const;

  AmbientCurvature ambient_curvature(double r) const;
  double lap_V_over_V(double r) const;  // trace of Hess(V)/V

  // (H3) monotone quantity  2 theta''/theta - (n-1)(1-theta'^2)/theta^2.
  double h3_quantity(double r) const;

  HypothesisReport check_hypotheses(const std::vector<double>& grid,
                                    double beta1 = 0.5,
                                    double holder_cap = 1e3) const;

  // Inverse of the monotone map r -> theta (implicit kinds and euclidean /
  // hyperbolic; sphere restricted to [0, pi/2]).
  double radius_of_theta(double theta_value) const;

  // Spaceform curvature K for the three closed-form kinds; nullopt otherwise.
  std::optional<int> spaceform_K() const;

  bool is_implicit() const {
    return kind_ == ProfileKind::Schwarzschild ||
           kind_ == ProfileKind::ReissnerNordstrom;
  }

 private:
  WarpingProfile() = default;
  void build_implicit();
  void build_tabulated();
  double radicand(double th) const;        // W(theta)
  double radicand_d1(double th) const;     // W'(theta)
  double radicand_d2(double th) const;     // W''(theta)
  double theta_of_r(double r) const;       // implicit kinds, via table
  void check_domain(double r) const;

  ProfileKind kind_;
  ProfileParams params_;
  double rbar_ = 0.0;
  double theta0_ = 0.0;  // theta(0) for implicit kinds
  HermiteTable table_;   // r -> theta with exact slopes (implicit kinds)
  // tabulated kind interpolants
  HermiteTable tab_theta_, tab_d1_, tab_d2_;
  CubicSpline tab_d3_;
};

}  // namespace warplab
