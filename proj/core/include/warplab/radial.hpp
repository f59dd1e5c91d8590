#pragma once

// High-accuracy 1-D solver for radially symmetric configurations, used as an
// independent reference for the 2-D solver and for the equality-case
// (analytic-resolution) deficit computations.
//
// Serrin problem on a geodesic ball of radius R in a spaceform:
//   f'' + n (theta'/theta) f' + (n+1) K f = phi(f),  f'(0)=0, f(R)=0
// (regular-centre shooting on f(0) with a series start).
//
// Warped torsion problem on { r <= R }:
//   f'' + n (theta'/theta) f' - (lap V / V) f = 1,
//   f(R) = 0 and f(0) = c0 = -theta(0)/((n+1) theta''(0)) when theta(0) > 0;
//   regular-centre condition when theta(0) = 0 (spaceforms).

#include <string>

#include "warplab/numerics.hpp"
#include "warplab/profile.hpp"
#include "warplab/source.hpp"

namespace warplab {

enum class RadialProblem { Serrin, WarpedTorsion };

struct RadialSolution {
  bool ok = false;
  std::string message;
  double R = 0.0;
  double f0 = 0.0;    // f(0)
  double f_nu = 0.0;  // f'(R)
  QuinticTable f;     // r -> f(r)
  HermiteTable df;    // r -> f'(r)

  double value(double r) const { return f(r); }
  double deriv(double r) const { return df(r); }
};

RadialSolution radial_serrin(const WarpingProfile& profile,
                             const SourceSpec& source, double R,
                             double tol = 1e-12);

RadialSolution radial_torsion(const WarpingProfile& profile, double R,
                              double tol = 1e-12);

RadialSolution radial_oracle(RadialProblem problem,
                             const WarpingProfile& profile,
                             const SourceSpec& source, double R,
                             double tol = 1e-12);

}  // namespace warplab
