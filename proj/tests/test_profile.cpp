#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "warplab/profile.hpp"

using namespace warplab;

namespace {
std::vector<double> uniform_grid(double a, double b, int m) {
  std::vector<double> g;
  for (int i = 1; i <= m; ++i) g.push_back(a + (b - a) * i / (m + 1.0));
  return g;
}

WarpingProfile schwarzschild_half(double kappa = 0.0) {
  ProfileParams p;
  p.n = 2;
  p.kappa = kappa;
  p.mass = 0.5;
  p.theta_cap = 4.0;
  return WarpingProfile::make(ProfileKind::Schwarzschild, p);
}
}  // namespace

TEST_CASE("closed-form kinds evaluate exactly") {
  auto hyp = WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n = 2});
  CHECK(hyp.theta(1.0) == doctest::Approx(std::sinh(1.0)).epsilon(1e-15));
  auto sph = WarpingProfile::make(ProfileKind::SpaceformSphere, {.n = 2});
  CHECK(sph.d1(std::numbers::pi / 4) ==
        doctest::Approx(std::cos(std::numbers::pi / 4)).epsilon(1e-15));
  auto euc = WarpingProfile::make(ProfileKind::Euclidean, {.n = 2});
  CHECK(euc.d2(0.0) == 0.0);
}

TEST_CASE("schwarzschild horizon and derivative chain") {
  auto p = schwarzschild_half();
  // theta(0) = (2m)^{1/(n-1)} = 1 for m = 1/2, n = 2.
  CHECK(p.theta(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(p.d1(0.0)) < 1e-6);
  // theta'' = kappa theta + m (n-1) theta^{-n}: at the horizon 0.5.
  CHECK(p.d2(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  // At theta = 2: theta'''/theta' = kappa - m n (n-1) theta^{-n-1} = -1/8.
  const double r2 = p.radius_of_theta(2.0);
  CHECK(p.theta(r2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.third_over_first(r2) == doctest::Approx(-0.125).epsilon(1e-12));
  // theta' = sqrt(1 - 1/theta) at theta = 2.
  CHECK(p.d1(r2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("implicit profile matches its defining first-order relation") {
  auto p = schwarzschild_half();
  for (double r : uniform_grid(0.0, 2.5, 17)) {
    const double th = p.theta(r);
    const double w = 1.0 - 1.0 / th;
    CHECK(p.d1(r) == doctest::Approx(std::sqrt(w)).epsilon(1e-12));
  }
}

TEST_CASE("finite differences of theta' confirm analytic third derivative") {
  // theta''' is produced by the chain rule; verify against second centered
  // differences of theta' under step refinement (observed order >= 2).
  auto p = schwarzschild_half();
  std::vector<double> steps{4e-3, 2e-3, 1e-3};
  std::vector<double> errs;
  for (double h : steps) {
    double emax = 0.0;
    for (double r : uniform_grid(0.2, 2.0, 9)) {
      const double fd =
          (p.d1(r + h) - 2.0 * p.d1(r) + p.d1(r - h)) / (h * h);
      emax = std::max(emax, std::abs(fd - p.d3(r)));
    }
    errs.push_back(emax);
  }
  CHECK(errs.back() < 1e-6);
  const double order = std::log2(errs[0] / errs[2]) / 2.0;
  CHECK(order >= 1.7);
}

TEST_CASE("third finite differences of theta itself converge at order 2") {
  auto p = schwarzschild_half();
  std::vector<double> steps{3.2e-2, 1.6e-2, 8e-3};
  std::vector<double> errs;
  for (double h : steps) {
    double emax = 0.0;
    for (double r : uniform_grid(0.3, 2.0, 7)) {
      const double fd = (p.theta(r + 2 * h) - 2.0 * p.theta(r + h) +
                         2.0 * p.theta(r - h) - p.theta(r - 2 * h)) /
                        (2.0 * h * h * h);
      emax = std::max(emax, std::abs(fd - p.d3(r)));
    }
    errs.push_back(emax);
  }
  const double order = std::log2(errs[0] / errs[2]) / 2.0;
  CHECK(order >= 1.7);
}

TEST_CASE("ambient curvature eigenvalues") {
  SUBCASE("euclidean space is Ricci flat") {
    auto p = WarpingProfile::make(ProfileKind::Euclidean, {.n = 2});
    const auto c = p.ambient_curvature(0.7);
    CHECK(std::abs(c.ricci_radial) < 1e-14);
    CHECK(std::abs(c.ricci_tangential) < 1e-14);
  }
  SUBCASE("unit sphere has Ricci = n g") {
    auto p = WarpingProfile::make(ProfileKind::SpaceformSphere, {.n = 2});
    const auto c = p.ambient_curvature(0.3);
    CHECK(c.ricci_radial == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.ricci_tangential == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("trace consistency of Hess V / V at random radii") {
    auto p = schwarzschild_half();
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(0.05, 2.5);
    for (int i = 0; i < 20; ++i) {
      const double r = dist(rng);
      const auto c = p.ambient_curvature(r);
      REQUIRE(c.hessian_defined);
      const double th = p.theta(r);
      // (n+1)-trace: radial + n * spherical/theta^2.
      const double tr = c.hessV_radial + p.n() * c.hessV_spherical / (th * th);
      CHECK(tr == doctest::Approx(c.lapV_over_V).epsilon(1e-10));
      CHECK(tr == doctest::Approx(p.lap_V_over_V(r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("spaceform Hessian-of-V eigenvalues equal -K theta'") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> dist(0.05, 1.3);
  for (int K : {1, -1}) {
    auto p = WarpingProfile::make(
        K == 1 ? ProfileKind::SpaceformSphere : ProfileKind::SpaceformHyperbolic,
        {.n = 2});
    for (int i = 0; i < 20; ++i) {
      double r = dist(rng);
      if (K == 1) r = std::min(r, 1.4);
      const auto c = p.ambient_curvature(r);
      const double th = p.theta(r), V = p.d1(r);
      // spherical coefficient per unit metric and radial coefficient both
      // equal -K V / V = -K.
      CHECK(std::abs(c.hessV_spherical / (th * th) + K) < 1e-10);
      CHECK(std::abs(c.hessV_radial + K) < 1e-10);
      (void)V;
    }
  }
}

TEST_CASE("tangential curvature combination matches assembled pieces") {
  // theta^2 theta'''/theta' + (n-2) theta theta'' + (n-1)(1-theta'^2) equals
  // the sigma-coefficient of (lapV/V) g - HessV/V + Ric assembled from the
  // separate AmbientCurvature fields.
  for (auto kind : {ProfileKind::SpaceformHyperbolic, ProfileKind::Schwarzschild}) {
    ProfileParams prm;
    prm.n = 3;
    prm.mass = kind == ProfileKind::Schwarzschild ? 0.5 : 0.0;
    auto p = WarpingProfile::make(kind, prm);
    for (double r : uniform_grid(0.2, 1.8, 7)) {
      const auto c = p.ambient_curvature(r);
      const double th = p.theta(r), th1 = p.d1(r), th2 = p.d2(r);
      const double direct = th * th * c.hessV_radial + (prm.n - 2) * th * th2 +
                            (prm.n - 1) * (1 - th1 * th1);
      // assembled: theta^2 [ lapV/V - tangential HessV/V + tangential Ricci ]
      const double assembled =
          th * th * (c.lapV_over_V - c.hessV_spherical / (th * th) +
                     c.ricci_tangential);
      CHECK(direct == doctest::Approx(assembled).epsilon(1e-9));
    }
  }
}

TEST_CASE("h3 quantity closed forms") {
  SUBCASE("sphere: constant -3 for n=2") {
    auto p = WarpingProfile::make(ProfileKind::SpaceformSphere, {.n = 2});
    CHECK(p.h3_quantity(0.5) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(p.h3_quantity(1.2) == doctest::Approx(-3.0).epsilon(1e-12));
  }
  SUBCASE("euclidean: identically zero (theta'' = 0, theta' = 1)") {
    auto p = WarpingProfile::make(ProfileKind::Euclidean, {.n = 2});
    CHECK(std::abs(p.h3_quantity(0.4)) < 1e-14);
    CHECK(std::abs(p.h3_quantity(2.9)) < 1e-14);
  }
  SUBCASE("schwarzschild: non-decreasing (constant (n+1) kappa)") {
    auto p = schwarzschild_half();
    const double q1 = p.h3_quantity(0.4), q2 = p.h3_quantity(1.9);
    CHECK(q1 <= q2 + 1e-12);
    CHECK(q1 == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("hypothesis checks") {
  auto grid = uniform_grid(0.0, 2.4, 160);
  SUBCASE("schwarzschild kappa=0 m=1/2 passes H1-H5") {
    auto p = schwarzschild_half();
    const auto rep = p.check_hypotheses(grid);
    for (const auto& item : rep.items) {
      INFO(item.hypothesis, " witness r=", item.witness_r, " value=", item.value);
      CHECK(item.pass);
    }
  }
  SUBCASE("AdS-schwarzschild kappa=1 passes H1-H5") {
    auto p = schwarzschild_half(1.0);
    CHECK(p.check_hypotheses(uniform_grid(0.0, 0.9 * p.rbar(), 160)).all_pass());
  }
  SUBCASE("reissner-nordstrom m=1/2 q=0.3 passes H1-H5") {
    ProfileParams prm;
    prm.n = 2;
    prm.mass = 0.5;
    prm.charge = 0.3;
    auto p = WarpingProfile::make(ProfileKind::ReissnerNordstrom, prm);
    // Outer horizon of theta^2 - theta + q^2: largest root 0.9.
    CHECK(p.theta(0.0) == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(p.check_hypotheses(grid).all_pass());
  }
  SUBCASE("hyperbolic fails H1 via theta'(0) = 1") {
    auto p = WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n = 2});
    const auto rep = p.check_hypotheses(uniform_grid(0.0, 1.5, 60));
    CHECK_FALSE(rep.items[0].pass);
  }
  SUBCASE("euclidean fails H1 via theta''(0) = 0") {
    auto p = WarpingProfile::make(ProfileKind::Euclidean, {.n = 2});
    const auto rep = p.check_hypotheses(uniform_grid(0.0, 1.5, 60));
    CHECK_FALSE(rep.items[0].pass);
  }
  SUBCASE("refining the grid never flips H2-H4 from fail to pass") {
    // Superset refinement: pass on the fine grid implies pass on the coarse.
    auto p = schwarzschild_half();
    std::vector<double> coarse = uniform_grid(0.0, 2.4, 20);
    std::vector<double> fine = coarse;
    for (size_t i = 0; i + 1 < coarse.size(); ++i)
      fine.push_back(0.5 * (coarse[i] + coarse[i + 1]));
    std::sort(fine.begin(), fine.end());
    const auto rc = p.check_hypotheses(coarse);
    const auto rf = p.check_hypotheses(fine);
    for (int k = 1; k <= 3; ++k) {
      if (!rc.items[k].pass) CHECK_FALSE(rf.items[k].pass);
    }
  }
}

TEST_CASE("de sitter schwarzschild horizon bound") {
  // kappa = -1: horizons exist only below the critical mass 3^{-3/2} (n=2).
  ProfileParams prm;
  prm.n = 2;
  prm.kappa = -1.0;
  prm.mass = 0.5;
  CHECK_THROWS_AS(WarpingProfile::make(ProfileKind::Schwarzschild, prm),
                  NoHorizonError);
  prm.mass = 0.15;
  auto p = WarpingProfile::make(ProfileKind::Schwarzschild, prm);
  CHECK(p.theta(0.0) > 0.0);
  CHECK(p.check_hypotheses(uniform_grid(0.0, 0.9 * p.rbar(), 120)).all_pass());
}

TEST_CASE("no-horizon reissner-nordstrom is rejected") {
  ProfileParams prm;
  prm.n = 2;
  prm.mass = 0.5;
  prm.charge = 0.6;  // q^2 > m^2: naked singularity, W > 0 everywhere
  CHECK_THROWS_AS(WarpingProfile::make(ProfileKind::ReissnerNordstrom, prm),
                  NoHorizonError);
}

TEST_CASE("invalid parameters are rejected") {
  ProfileParams prm;
  prm.n = 2;
  prm.mass = -1.0;
  CHECK_THROWS_AS(WarpingProfile::make(ProfileKind::Schwarzschild, prm),
                  InvalidParameters);
  CHECK_THROWS_AS(
      WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n = 0}),
      InvalidParameters);
}

TEST_CASE("out-of-domain evaluation throws") {
  auto p = WarpingProfile::make(ProfileKind::SpaceformSphere, {.n = 2});
  CHECK_THROWS_AS(p.theta(2.0), OutOfDomain);
  CHECK_THROWS_AS(p.theta(-0.1), OutOfDomain);
}

TEST_CASE("tabulated profile interpolates sinh samples") {
  ProfileParams prm;
  prm.n = 2;
  for (int i = 0; i <= 100; ++i) {
    const double r = 2.0 * i / 100;
    prm.tab_r.push_back(r);
    prm.tab_theta.push_back(std::sinh(r));
    prm.tab_d1.push_back(std::cosh(r));
    prm.tab_d2.push_back(std::sinh(r));
    prm.tab_d3.push_back(std::cosh(r));
  }
  auto p = WarpingProfile::make(ProfileKind::Tabulated, prm);
  CHECK(p.theta(0.5) == doctest::Approx(std::sinh(0.5)).epsilon(1e-8));
  CHECK(p.d1(0.5) == doctest::Approx(std::cosh(0.5)).epsilon(1e-6));
  CHECK(p.d2(1.3) == doctest::Approx(std::sinh(1.3)).epsilon(1e-5));
  // derivative consistency at discretization order: FD of interpolated theta
  const double h = 1e-2, r = 0.8;
  const double fd = (p.theta(r + h) - p.theta(r - h)) / (2 * h);
  CHECK(fd == doctest::Approx(p.d1(r)).epsilon(1e-4));
}

TEST_CASE("radius_of_theta inverts eval") {
  auto p = schwarzschild_half();
  for (double th : {1.1, 1.5, 2.0, 3.0}) {
    const double r = p.radius_of_theta(th);
    CHECK(p.theta(r) == doctest::Approx(th).epsilon(1e-11));
  }
}
