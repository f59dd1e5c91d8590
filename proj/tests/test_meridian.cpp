#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "warplab/fem.hpp"
#include "warplab/meridian.hpp"

using namespace warplab;

namespace {
constexpr double kPi = std::numbers::pi;

WarpingProfile hyperbolic() {
  return WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n = 2});
}
WarpingProfile hyperbolic_n1() {
  return WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n = 1});
}
WarpingProfile schwarzschild() {
  ProfileParams p;
  p.n = 2;
  p.mass = 0.5;
  return WarpingProfile::make(ProfileKind::Schwarzschild, p);
}
}  // namespace

TEST_CASE("domain validation") {
  auto prof = schwarzschild();
  const double r2 = prof.radius_of_theta(2.0);

  SUBCASE("slab between horizon and slice is homologous") {
    GraphSpec g{r2, {}};
    auto dom = build_domain(prof, g, Topology::HomologousToInnerSlice);
    CHECK(dom.theta0() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("wrong topology flag is rejected") {
    GraphSpec g{r2, {}};
    CHECK_THROWS_AS(build_domain(prof, g, Topology::NullHomologous),
                    ValidationError);
  }
  SUBCASE("perturbed slab is valid when inside range") {
    GraphSpec g{r2, {0.1}};
    CHECK_NOTHROW(build_domain(prof, g, Topology::HomologousToInnerSlice));
  }
  SUBCASE("graph exiting the domain is rejected") {
    GraphSpec g{r2, {10.0}};
    CHECK_THROWS_AS(build_domain(prof, g, Topology::HomologousToInnerSlice),
                    ValidationError);
  }
  SUBCASE("spaceform ball is null-homologous") {
    auto hyp = hyperbolic();
    CHECK_NOTHROW(build_ball(hyp, 1.0));
    GraphSpec g{1.0, {}};
    CHECK_THROWS_AS(build_domain(hyp, g, Topology::HomologousToInnerSlice),
                    ValidationError);
  }
  SUBCASE("hemisphere cap") {
    auto sph = WarpingProfile::make(ProfileKind::SpaceformSphere, {.n = 2});
    CHECK_NOTHROW(build_ball(sph, 0.8));
    CHECK_THROWS_AS(build_ball(sph, kPi / 2 - 0.01), ValidationError);
  }
}

TEST_CASE("closed-form volume integrals") {
  SUBCASE("slice area in schwarzschild: theta^2 |S^2| at theta = 2") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {}},
                            Topology::HomologousToInnerSlice);
    auto surf = boundary_geometry(dom, 64);
    CHECK(surf.area() == doctest::Approx(4.0 * 4 * kPi).epsilon(1e-10));
  }
  SUBCASE("hyperbolic ball boundary area and n=1 volume") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    auto surf = boundary_geometry(dom, 64);
    CHECK(surf.area() ==
          doctest::Approx(4 * kPi * std::sinh(1.0) * std::sinh(1.0))
              .epsilon(1e-10));
    // n = 1: area of the hyperbolic disc of radius R is 2 pi (cosh R - 1).
    auto prof1 = hyperbolic_n1();
    auto dom1 = build_ball(prof1, 1.0);
    CHECK(dom1.volume() ==
          doctest::Approx(2 * kPi * (std::cosh(1.0) - 1.0)).epsilon(1e-10));
  }
  SUBCASE("integral of V via the fibre closed form") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    // int_Omega cosh r = |S^2| sinh^3(R)/3 for n = 2.
    const double exact = 4 * kPi * std::pow(std::sinh(1.0), 3) / 3.0;
    CHECK(dom.integral_V() == doctest::Approx(exact).epsilon(1e-11));
  }
}

TEST_CASE("boundary geometry invariants") {
  SUBCASE("slices are umbilic with H1 = theta'/theta") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {}},
                            Topology::HomologousToInnerSlice);
    auto surf = boundary_geometry(dom, 48);
    const double want = prof.d1(r2) / 2.0;
    for (const auto& nd : surf.nodes()) {
      CHECK(nd.H1 == doctest::Approx(want).epsilon(1e-12));
      CHECK(std::abs(nd.ringA_sq) < 1e-16);
      CHECK(nd.radial_cos == doctest::Approx(1.0));
    }
  }
  SUBCASE("geodesic spheres in hyperbolic space have kappa = coth R") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    auto surf = boundary_geometry(dom, 48);
    for (const auto& nd : surf.nodes()) {
      CHECK(nd.kappa_m == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-12));
      CHECK(nd.kappa_p == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-12));
    }
  }
  SUBCASE("outward normal at the maximal radius point") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {0.1}},
                            Topology::HomologousToInnerSlice);
    auto surf = boundary_geometry(dom, 200);
    // max of u at s = 0; radial cosine there tends to 1
    const auto& first = surf.nodes().front();
    CHECK(first.radial_cos > 0.999);
    for (const auto& nd : surf.nodes()) {
      const double t2 = 1.0 - nd.radial_cos * nd.radial_cos;
      CHECK(t2 >= -1e-14);
      CHECK(t2 <= 1.0 + 1e-14);
    }
  }
  SUBCASE("perturbed slab has positive stable ring A norm") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {0.1}},
                            Topology::HomologousToInnerSlice);
    auto s1 = boundary_geometry(dom, 96);
    auto s2 = boundary_geometry(dom, 192);
    const double a1 = s1.integrate([](const BoundaryNode& nd) {
      return nd.ringA_sq;
    });
    const double a2 = s2.integrate([](const BoundaryNode& nd) {
      return nd.ringA_sq;
    });
    CHECK(a1 > 0.0);
    CHECK(std::abs(a1 - a2) / a2 < 1e-2);
  }
  SUBCASE("warped Minkowski flux: int_M (n V - H <X,nu>) = 0") {
    auto prof = hyperbolic();
    GraphSpec g{1.0, {0.0, 0.05}};  // cos(2s) perturbed ball
    auto dom = build_domain(prof, g, Topology::NullHomologous);
    auto surf = boundary_geometry(dom, 256);
    const double flux = surf.integrate([&](const BoundaryNode& nd) {
      return 2.0 * nd.V - 2.0 * nd.H1 * nd.support;
    });
    const double scale = surf.integrate([&](const BoundaryNode& nd) {
      return 2.0 * nd.V + 2.0 * std::abs(nd.H1) * std::abs(nd.support);
    });
    CHECK(std::abs(flux) / scale < 1e-10);
  }
  SUBCASE("support flux identity against the fibre closed form") {
    // int_M <theta dr, nu> = (n+1) int_Omega V + theta(0)^{n+1} |S^n|.
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {0.1, 0.03}},
                            Topology::HomologousToInnerSlice);
    auto surf = boundary_geometry(dom, 128);
    const double lhs = surf.integrate([](const BoundaryNode& nd) {
      return nd.support;
    });
    const double rhs = 3.0 * dom.integral_V() + 1.0 * 4 * kPi;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("mesh weighted volume") {
  SUBCASE("slab weighted area matches 1-D quadrature to < 1%") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {}},
                            Topology::HomologousToInnerSlice);
    auto mesh = build_mesh(dom, 0.1);
    const double vol = mesh.integrate([](double, double) { return 1.0; });
    CHECK(vol == doctest::Approx(dom.volume()).epsilon(1e-2));
  }
  SUBCASE("hyperbolic ball n=1: refinement drops the error by >= 3") {
    auto prof = hyperbolic_n1();
    auto dom = build_ball(prof, 1.0);
    const double exact = 2 * kPi * (std::cosh(1.0) - 1.0);
    auto mesh1 = build_mesh(dom, 0.1);
    auto mesh2 = build_mesh(dom, 0.05);
    const double e1 = std::abs(mesh1.integrate([](double, double) {
      return 1.0;
    }) - exact);
    const double e2 = std::abs(mesh2.integrate([](double, double) {
      return 1.0;
    }) - exact);
    CHECK(e1 / e2 >= 3.0);
  }
  SUBCASE("h larger than the thickness fails") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    CHECK_THROWS_AS(build_mesh(dom, 1.5), MeshError);
  }
  SUBCASE("zero field integrates to zero") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    auto mesh = build_mesh(dom, 0.2);
    std::vector<double> zeros(mesh.num_nodes(), 0.0);
    CHECK(mesh.integrate(std::span<const double>(zeros)) == 0.0);
  }
}

TEST_CASE("mesh point location and interpolation") {
  auto prof = hyperbolic();
  auto dom = build_ball(prof, 1.0);
  auto mesh = build_mesh(dom, 0.05);
  // Interpolate a quadratic in (r,s): P2 reproduces it exactly inside
  // straight elements; the mapped elements are curved, so allow slack.
  std::vector<double> nodal(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double r = mesh.node_r(i), s = mesh.node_s(i);
    nodal[i] = 1.0 + r + 0.5 * s;  // affine: exactly reproduced
  }
  int elem;
  double xi, eta;
  for (double r : {0.1, 0.5, 0.93}) {
    for (double s : {0.3, 1.5, 2.9}) {
      REQUIRE(mesh.locate(r, s, elem, xi, eta));
      const double v = mesh.interpolate(std::span<const double>(nodal), elem,
                                        xi, eta);
      CHECK(v == doctest::Approx(1.0 + r + 0.5 * s).epsilon(1e-9));
    }
  }
}

TEST_CASE("interior ball radius") {
  SUBCASE("hyperbolic ball rolls to itself") {
    auto prof = hyperbolic();
    auto dom = build_ball(prof, 1.0);
    CHECK(interior_ball_radius(dom) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("slab of thickness ~2 has rho ~ half thickness") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {}},
                            Topology::HomologousToInnerSlice);
    const double rho = interior_ball_radius(dom);
    CHECK(rho == doctest::Approx(r2 / 2).epsilon(0.03));
  }
  SUBCASE("thin perturbed slab is capped by curvature") {
    auto prof = schwarzschild();
    const double r2 = prof.radius_of_theta(2.0);
    auto dom = build_domain(prof, GraphSpec{r2, {0.0, 0.0, 0.0, 0.12}},
                            Topology::HomologousToInnerSlice);
    auto surf = boundary_geometry(dom, 128);
    const double rho = interior_ball_radius(dom);
    CHECK(rho <= 1.0 / surf.max_principal_curvature() * (1.0 + 1e-3));
  }
}

TEST_CASE("graph identity for the radial cosine") {
  // 1 - <dr,nu>^2 = theta^{-2} u'^2 / (1 + theta^{-2} u'^2) pointwise.
  auto prof = schwarzschild();
  const double r2 = prof.radius_of_theta(2.0);
  auto dom = build_domain(prof, GraphSpec{r2, {0.1}},
                          Topology::HomologousToInnerSlice);
  auto surf = boundary_geometry(dom, 64);
  for (const auto& nd : surf.nodes()) {
    const double lhs = 1.0 - nd.radial_cos * nd.radial_cos;
    const double q = nd.du * nd.du / (nd.theta * nd.theta);
    CHECK(lhs == doctest::Approx(q / (1.0 + q)).epsilon(1e-12));
  }
}
