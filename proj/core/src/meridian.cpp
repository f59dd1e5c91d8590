#include "warplab/meridian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace warplab {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(Topology t) {
  return t == Topology::NullHomologous ? "null-homologous"
                                       : "homologous-to-inner-slice";
}

double GraphSpec::value(double s) const {
  double u = r0;
  for (size_t k = 0; k < coef.size(); ++k) u += coef[k] * std::cos((k + 1) * s);
  return u;
}
double GraphSpec::d1(double s) const {
  double u = 0.0;
  for (size_t k = 0; k < coef.size(); ++k)
    u -= coef[k] * (k + 1) * std::sin((k + 1) * s);
  return u;
}
double GraphSpec::d2(double s) const {
  double u = 0.0;
  for (size_t k = 0; k < coef.size(); ++k)
    u -= coef[k] * (k + 1) * (k + 1) * std::cos((k + 1) * s);
  return u;
}
double GraphSpec::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2048; ++i) m = std::min(m, value(kPi * i / 2048));
  return m;
}
double GraphSpec::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2048; ++i) m = std::max(m, value(kPi * i / 2048));
  return m;
}
bool GraphSpec::is_slice() const {
  for (double c : coef)
    if (c != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Domain

MeridianDomain build_domain(const WarpingProfile& profile,
                            const GraphSpec& graph, Topology topology,
                            double beta2) {
  MeridianDomain d;
  d.profile_ = &profile;
  d.graph_ = graph;
  d.topology_ = topology;
  d.beta2_ = beta2;

  const double umin = graph.min_value();
  const double umax = graph.max_value();
  if (!(umin > 0.0))
    throw ValidationError("domain: graph must satisfy min u > 0");
  if (!(umax < profile.rbar()))
    throw ValidationError("domain: graph exits [0, rbar)");
  if (profile.kind() == ProfileKind::SpaceformSphere &&
      umax > kPi / 2.0 - 0.05)
    throw ValidationError(
        "domain: spherical domains are restricted to max r <= pi/2 - 0.05");

  const double th0 = profile.theta(0.0);
  const bool has_inner = th0 > 1e-12;
  if (has_inner && topology != Topology::HomologousToInnerSlice)
    throw ValidationError(
        "domain: theta(0) > 0, boundary must be homologous to the inner "
        "slice");
  if (!has_inner && topology != Topology::NullHomologous)
    throw ValidationError(
        "domain: theta(0) = 0, boundary must be null-homologous");

  d.rho_ = 0.0;  // filled below once geometry exists
  d.rho_ = interior_ball_radius(d);
  return d;
}

MeridianDomain build_ball(const WarpingProfile& profile, double R) {
  if (!profile.spaceform_K())
    throw ValidationError("build_ball: spaceform profile required");
  GraphSpec g;
  g.r0 = R;
  return build_domain(profile, g, Topology::NullHomologous);
}

double MeridianDomain::theta0() const { return profile_->theta(0.0); }

double MeridianDomain::integral_V() const {
  const int n = profile_->n();
  const double th0 = theta0();
  const double snm1 = unit_sphere_volume(n - 1);
  auto f = [&](double s) {
    const double thu = profile_->theta(graph_.value(s));
    return std::pow(std::sin(s), n - 1) *
           (std::pow(thu, n + 1) - std::pow(th0, n + 1)) / (n + 1);
  };
  return snm1 * integrate(f, 0.0, kPi, 128, 10);
}

double MeridianDomain::volume() const {
  return volume_integral([](double, double) { return 1.0; });
}

double MeridianDomain::volume_integral(
    const std::function<double(double, double)>& g, int panels_s,
    int panels_r) const {
  const int n = profile_->n();
  const double snm1 = unit_sphere_volume(n - 1);
  auto outer = [&](double s) {
    const double u = graph_.value(s);
    auto inner = [&](double r) {
      return g(r, s) * std::pow(profile_->theta(r), n);
    };
    return std::pow(std::sin(s), n - 1) *
           integrate(inner, 0.0, u, panels_r, 10);
  };
  return snm1 * integrate(outer, 0.0, kPi, panels_s, 10);
}

// ---------------------------------------------------------------------------
// Interior ball estimate

namespace {

// Length of the coordinate chord between two meridian points in the metric
// dr^2 + theta^2 dalpha^2, with the angular separation taken in the full
// meridian plane (the two half-planes s and 2 pi - s are one plane).
double chord_length(const WarpingProfile& prof, double r1, double s1,
                    double r2, double s2) {
  double da = std::abs(s1 - s2);
  da = std::min(da, std::min(s1 + s2, 2.0 * kPi - s1 - s2));
  const double dr = r2 - r1;
  const QuadRule& q = gauss_legendre(8);
  double acc = 0.0;
  for (size_t k = 0; k < q.x.size(); ++k) {
    const double t = 0.5 * (q.x[k] + 1.0);
    const double th = prof.theta(r1 + t * dr);
    acc += q.w[k] * std::sqrt(dr * dr + th * th * da * da);
  }
  return 0.5 * acc;
}

}  // namespace

double interior_ball_radius(const MeridianDomain& domain) {
  const WarpingProfile& prof = domain.profile();
  const GraphSpec& g = domain.graph();

  // Boundary samples: the graph M, plus the inner slice when present.
  const int nb = 256;
  std::vector<double> bs(nb), br(nb);
  for (int i = 0; i < nb; ++i) {
    bs[i] = kPi * (i + 0.5) / nb;
    br[i] = g.value(bs[i]);
  }
  const bool has_inner =
      domain.topology() == Topology::HomologousToInnerSlice;

  // Distance-to-boundary maximization over an interior sample grid.
  double inradius = 0.0;
  const int ms = 64, mr = 64;
  for (int j = 0; j <= ms; ++j) {
    const double s = kPi * j / ms;
    const double u = g.value(s);
    for (int i = 0; i <= mr; ++i) {
      const double r = u * i / mr;
      double dist = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k)
        dist = std::min(dist, chord_length(prof, r, s, br[k], bs[k]));
      // Distance to the inner slice is the radial coordinate itself.
      if (has_inner) dist = std::min(dist, r);
      inradius = std::max(inradius, dist);
    }
  }

  // Curvature cap: radius of the comparison ball whose boundary curvature
  // equals the largest principal curvature. In spaceforms the exact relation
  // (cot / coth / reciprocal) is inverted; otherwise the flat reciprocal is
  // used as a conservative stand-in.
  BoundarySurface surf = make_surface(prof, graph_fn(g), domain.n(), 96);
  const double kmax = surf.max_principal_curvature();
  double rho_curv = std::numeric_limits<double>::infinity();
  const auto K = prof.spaceform_K();
  if (K && *K == -1) {
    if (kmax > 1.0) rho_curv = std::atanh(1.0 / kmax);
  } else if (K && *K == 1) {
    rho_curv = (kmax > 0) ? std::atan(1.0 / kmax) : kPi / 2.0;
  } else {
    if (kmax > 0) rho_curv = 1.0 / kmax;
  }
  return std::min(inradius, rho_curv);
}

// ---------------------------------------------------------------------------
// Boundary surface

GraphFn graph_fn(const GraphSpec& g) {
  GraphFn f;
  f.value = [g](double s) { return g.value(s); };
  f.d1 = [g](double s) { return g.d1(s); };
  f.d2 = [g](double s) { return g.d2(s); };
  return f;
}

GraphFn graph_fn(std::shared_ptr<CubicSpline> spline) {
  GraphFn f;
  f.value = [spline](double s) { return (*spline)(s); };
  f.d1 = [spline](double s) { return spline->derivative(s); };
  f.d2 = [spline](double s) { return spline->second_derivative(s); };
  return f;
}

BoundarySurface make_surface(const WarpingProfile& profile, const GraphFn& u,
                             int n, int panels) {
  BoundarySurface surf;
  surf.n_ = n;
  const double snm1 = unit_sphere_volume(n - 1);
  const QuadRule& q = gauss_legendre(8);
  surf.nodes_.reserve(panels * q.x.size());
  const double ds = kPi / panels;
  for (int p = 0; p < panels; ++p) {
    for (size_t k = 0; k < q.x.size(); ++k) {
      BoundaryNode nd{};
      nd.s = ds * (p + 0.5 * (q.x[k] + 1.0));
      nd.u = u.value(nd.s);
      nd.du = u.d1(nd.s);
      nd.ddu = u.d2(nd.s);
      nd.theta = profile.theta(nd.u);
      nd.V = profile.d1(nd.u);
      const double th = nd.theta, th1 = nd.V;
      const double J = std::sqrt(nd.du * nd.du + th * th);
      nd.nu_r = th / J;
      nd.nu_s = -nd.du / (th * J);
      nd.radial_cos = nd.nu_r;
      nd.support = th * nd.radial_cos;
      nd.kappa_m =
          (-th * nd.ddu + th * th * th1 + 2.0 * th1 * nd.du * nd.du) /
          (J * J * J);
      const double sn = std::sin(nd.s), cs = std::cos(nd.s);
      // u' cot s -> u''(s) at the axis; cosine-series graphs have u'(0)=0.
      const double ucot = (std::abs(sn) > 1e-7) ? nd.du * cs / sn : nd.ddu;
      nd.kappa_p = (th * th1 - ucot) / (th * J);
      nd.H1 = (nd.kappa_m + (n - 1) * nd.kappa_p) / n;
      const double diff = nd.kappa_m - nd.kappa_p;
      nd.ringA_sq = (n - 1.0) / n * diff * diff;
      nd.dA = snm1 * std::pow(th, n - 1) * std::pow(sn, n - 1) * J *
              (0.5 * ds * q.w[k]);
      surf.nodes_.push_back(nd);
    }
  }
  return surf;
}

BoundarySurface boundary_geometry(const MeridianDomain& domain, int panels) {
  return make_surface(domain.profile(), graph_fn(domain.graph()), domain.n(),
                      panels);
}

double BoundarySurface::area() const {
  double a = 0.0;
  for (const auto& nd : nodes_) a += nd.dA;
  return a;
}

double BoundarySurface::integrate(std::span<const double> nodal) const {
  if (nodal.size() != nodes_.size())
    throw std::invalid_argument("BoundarySurface::integrate: size mismatch");
  double a = 0.0;
  for (size_t i = 0; i < nodes_.size(); ++i) a += nodal[i] * nodes_[i].dA;
  return a;
}

double BoundarySurface::integrate(
    const std::function<double(const BoundaryNode&)>& f) const {
  double a = 0.0;
  for (const auto& nd : nodes_) a += f(nd) * nd.dA;
  return a;
}

double BoundarySurface::min_H1() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& nd : nodes_) m = std::min(m, nd.H1);
  return m;
}

double BoundarySurface::max_principal_curvature() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& nd : nodes_)
    m = std::max(m, std::max(nd.kappa_m, nd.kappa_p));
  return m;
}

// ---------------------------------------------------------------------------
// P2 reference element

void p2_shape(double xi, double eta, double N[6]) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  N[0] = l0 * (2 * l0 - 1);
  N[1] = l1 * (2 * l1 - 1);
  N[2] = l2 * (2 * l2 - 1);
  N[3] = 4 * l0 * l1;
  N[4] = 4 * l1 * l2;
  N[5] = 4 * l2 * l0;
}

void p2_shape_grad(double xi, double eta, double dN[6][2]) {
  const double l0 = 1.0 - xi - eta;
  dN[0][0] = 1.0 - 4.0 * l0;
  dN[0][1] = 1.0 - 4.0 * l0;
  dN[1][0] = 4.0 * xi - 1.0;
  dN[1][1] = 0.0;
  dN[2][0] = 0.0;
  dN[2][1] = 4.0 * eta - 1.0;
  dN[3][0] = 4.0 * (l0 - xi);
  dN[3][1] = -4.0 * xi;
  dN[4][0] = 4.0 * eta;
  dN[4][1] = 4.0 * xi;
  dN[5][0] = -4.0 * eta;
  dN[5][1] = 4.0 * (l0 - eta);
}

namespace {
// Dunavant degree-5 rule, 7 interior points; weights sum to the reference
// area 1/2.
struct TriRule {
  double xi[7], eta[7], w[7];
};
const TriRule& tri_rule() {
  static TriRule rule = [] {
    TriRule t{};
    const double w0 = 0.225;
    const double a1 = 0.059715871789770, b1 = 0.470142064105115,
                 w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456,
                 w2 = 0.125939180544827;
    double bc[7][3] = {
        {1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
        {a2, b2, b2},                {b2, a2, b2}, {b2, b2, a2}};
    double ws[7] = {w0, w1, w1, w1, w2, w2, w2};
    for (int i = 0; i < 7; ++i) {
      t.xi[i] = bc[i][1];
      t.eta[i] = bc[i][2];
      t.w[i] = 0.5 * ws[i];
    }
    return t;
  }();
  return rule;
}
}  // namespace

// ---------------------------------------------------------------------------
// Mesh construction

MeridianMesh build_mesh(const MeridianDomain& domain, double h) {
  if (!(h > 0)) throw MeshError("mesh: h > 0 required");
  const GraphSpec& g = domain.graph();
  const double umin = g.min_value();
  const double umax = g.max_value();
  if (h > umin) throw MeshError("mesh: h exceeds the domain thickness");

  MeridianMesh mesh;
  mesh.domain_ = &domain;
  mesh.h_ = h;
  const double theta_max = domain.profile().theta(umax);
  mesh.Ns_ = std::max(4, static_cast<int>(std::ceil(kPi * theta_max / h)));
  mesh.Nr_ = std::max(2, static_cast<int>(std::ceil(umax / h)));

  const int fi = 2 * mesh.Nr_ + 1, fj = 2 * mesh.Ns_ + 1;
  mesh.fine_cols_ = fj;
  mesh.node_r_.resize(fi * fj);
  mesh.node_s_.resize(fi * fj);
  mesh.flag_.assign(fi * fj, 0);
  const bool has_inner =
      domain.topology() == Topology::HomologousToInnerSlice;
  for (int i = 0; i < fi; ++i) {
    const double xi = static_cast<double>(i) / (fi - 1);
    for (int j = 0; j < fj; ++j) {
      const double s = kPi * j / (fj - 1);
      const int id = mesh.fine_id(i, j);
      mesh.node_s_[id] = s;
      mesh.node_r_[id] = xi * g.value(s);
      if (i == fi - 1) mesh.flag_[id] |= 1;
      if (i == 0 && has_inner) mesh.flag_[id] |= 2;
    }
  }
  for (int id = 0; id < fi * fj; ++id) {
    if (mesh.flag_[id] & 1) mesh.outer_nodes_.push_back(id);
    if (mesh.flag_[id] & 2) mesh.inner_nodes_.push_back(id);
  }

  mesh.tris_.reserve(2 * mesh.Nr_ * mesh.Ns_);
  for (int I = 0; I < mesh.Nr_; ++I) {
    for (int J = 0; J < mesh.Ns_; ++J) {
      const int i0 = 2 * I, j0 = 2 * J;
      auto id = [&](int di, int dj) { return mesh.fine_id(i0 + di, j0 + dj); };
      // Quad corners: A=(0,0) B=(2,0) C=(2,2) D=(0,2); diagonal A-C.
      mesh.tris_.push_back({id(0, 0), id(2, 0), id(2, 2),
                            id(1, 0), id(2, 1), id(1, 1)});
      mesh.tris_.push_back({id(0, 0), id(2, 2), id(0, 2),
                            id(1, 1), id(1, 2), id(0, 1)});
    }
  }

  mesh.node_tris_.assign(fi * fj, {});
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int k = 0; k < 6; ++k) mesh.node_tris_[mesh.tris_[e][k]].push_back(e);

  // Orientation sanity: detJ > 0 at the centroid of every element.
  for (int e = 0; e < mesh.num_elements(); ++e) {
    double r, s, jit[4], det;
    mesh.element_geometry(e, 1.0 / 3, 1.0 / 3, r, s, jit, det);
    if (!(det > 0)) throw MeshError("mesh: inverted element");
  }
  return mesh;
}

double MeridianMesh::weight(double r, double s) const {
  const int n = this->n();
  return unit_sphere_volume(n - 1) * std::pow(profile().theta(r), n) *
         std::pow(std::sin(s), n - 1);
}

void MeridianMesh::element_geometry(int elem, double xi, double eta, double& r,
                                    double& s, double jac_inv_t[4],
                                    double& det) const {
  const auto& t = tris_[elem];
  double N[6], dN[6][2];
  p2_shape(xi, eta, N);
  p2_shape_grad(xi, eta, dN);
  r = s = 0.0;
  double j00 = 0, j01 = 0, j10 = 0, j11 = 0;  // d(r,s)/d(xi,eta)
  for (int k = 0; k < 6; ++k) {
    const double rk = node_r_[t[k]], sk = node_s_[t[k]];
    r += N[k] * rk;
    s += N[k] * sk;
    j00 += dN[k][0] * rk;
    j01 += dN[k][1] * rk;
    j10 += dN[k][0] * sk;
    j11 += dN[k][1] * sk;
  }
  det = j00 * j11 - j01 * j10;
  if (jac_inv_t) {
    // inverse transpose of J = [[j00, j01], [j10, j11]]
    const double inv = 1.0 / det;
    jac_inv_t[0] = j11 * inv;   // (J^{-T})_00
    jac_inv_t[1] = -j10 * inv;  // (J^{-T})_01
    jac_inv_t[2] = -j01 * inv;  // (J^{-T})_10
    jac_inv_t[3] = j00 * inv;   // (J^{-T})_11
  }
}

void MeridianMesh::for_each_qpoint(
    const std::function<void(const QPoint&)>& fn) const {
  const TriRule& rule = tri_rule();
  for (int e = 0; e < num_elements(); ++e) {
    for (int qp = 0; qp < 7; ++qp) {
      QPoint q;
      double jit[4], det;
      element_geometry(e, rule.xi[qp], rule.eta[qp], q.r, q.s, jit, det);
      q.weight = rule.w[qp] * det * weight(q.r, q.s);
      q.elem = e;
      q.xi = rule.xi[qp];
      q.eta = rule.eta[qp];
      fn(q);
    }
  }
}

double MeridianMesh::integrate(std::span<const double> nodal) const {
  if (static_cast<int>(nodal.size()) != num_nodes())
    throw std::invalid_argument("mesh integrate: size mismatch");
  const TriRule& rule = tri_rule();
  double total = 0.0;
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = tris_[e];
    for (int qp = 0; qp < 7; ++qp) {
      double r, s, det, N[6];
      element_geometry(e, rule.xi[qp], rule.eta[qp], r, s, nullptr, det);
      p2_shape(rule.xi[qp], rule.eta[qp], N);
      double v = 0.0;
      for (int k = 0; k < 6; ++k) v += N[k] * nodal[t[k]];
      total += rule.w[qp] * det * weight(r, s) * v;
    }
  }
  return total;
}

double MeridianMesh::integrate(
    const std::function<double(double, double)>& g) const {
  double total = 0.0;
  for_each_qpoint([&](const QPoint& q) { total += q.weight * g(q.r, q.s); });
  return total;
}

double MeridianMesh::interpolate(std::span<const double> nodal, int elem,
                                 double xi, double eta) const {
  double N[6];
  p2_shape(xi, eta, N);
  const auto& t = tris_[elem];
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += N[k] * nodal[t[k]];
  return v;
}

void MeridianMesh::gradient(std::span<const double> nodal, int elem, double xi,
                            double eta, double grad[2]) const {
  double r, s, jit[4], det, dN[6][2];
  element_geometry(elem, xi, eta, r, s, jit, det);
  p2_shape_grad(xi, eta, dN);
  const auto& t = tris_[elem];
  grad[0] = grad[1] = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double gx = jit[0] * dN[k][0] + jit[1] * dN[k][1];
    const double gy = jit[2] * dN[k][0] + jit[3] * dN[k][1];
    grad[0] += gx * nodal[t[k]];
    grad[1] += gy * nodal[t[k]];
  }
}

namespace {
// Inverts the P2 map of one element by Newton; returns true when the
// reference point lies inside (with tolerance).
bool invert_in_element(const MeridianMesh& mesh, int elem, double r, double s,
                       double& xi, double& eta, double tol) {
  xi = 1.0 / 3;
  eta = 1.0 / 3;
  for (int it = 0; it < 30; ++it) {
    double rr, ss, jit[4], det;
    mesh.element_geometry(elem, xi, eta, rr, ss, jit, det);
    const double fr = rr - r, fs = ss - s;
    if (std::abs(fr) + std::abs(fs) < 1e-14) break;
    // Solve J dx = f with J = [[j00, j01],[j10, j11]], jit holds J^{-T}.
    const double dxi = jit[0] * fr + jit[2] * fs;
    const double deta = jit[1] * fr + jit[3] * fs;
    xi -= dxi;
    eta -= deta;
    if (!std::isfinite(xi) || !std::isfinite(eta)) return false;
    if (std::abs(dxi) + std::abs(deta) < 1e-15) break;
  }
  return xi >= -tol && eta >= -tol && xi + eta <= 1.0 + tol;
}
}  // namespace

bool MeridianMesh::locate(double r, double s, int& elem, double& xi,
                          double& eta) const {
  const GraphSpec& g = domain_->graph();
  const double u = g.value(std::clamp(s, 0.0, kPi));
  if (r < -1e-12 || s < -1e-9 || s > kPi + 1e-9) return false;
  const double xig = std::clamp(r / u, 0.0, 1.0);
  const int I = std::clamp(static_cast<int>(xig * Nr_), 0, Nr_ - 1);
  const int J =
      std::clamp(static_cast<int>(s / (kPi / Ns_)), 0, Ns_ - 1);
  // Candidate elements: the two triangles of the guessed quad, then rings of
  // neighbouring quads.
  for (int ring = 0; ring <= 2; ++ring) {
    for (int dI = -ring; dI <= ring; ++dI) {
      for (int dJ = -ring; dJ <= ring; ++dJ) {
        if (std::max(std::abs(dI), std::abs(dJ)) != ring) continue;
        const int II = I + dI, JJ = J + dJ;
        if (II < 0 || II >= Nr_ || JJ < 0 || JJ >= Ns_) continue;
        const int base = 2 * (II * Ns_ + JJ);
        for (int k = 0; k < 2; ++k) {
          if (invert_in_element(*this, base + k, r, s, xi, eta, 1e-9)) {
            elem = base + k;
            return true;
          }
        }
      }
    }
  }
  // Last resort with a generous tolerance (points on the boundary).
  const int base = 2 * (I * Ns_ + J);
  for (int k = 0; k < 2; ++k) {
    if (invert_in_element(*this, base + k, r, s, xi, eta, 1e-6)) {
      elem = base + k;
      return true;
    }
  }
  return false;
}

void MeridianMesh::write_text(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open mesh output: " + path);
  out.precision(17);
  out << "# meridian mesh: nodes (r s flag), then P2 triangles (6 node ids)\n";
  out << num_nodes() << "\n";
  for (int i = 0; i < num_nodes(); ++i)
    out << node_r_[i] << " " << node_s_[i] << " " << int(flag_[i]) << "\n";
  out << num_elements() << "\n";
  for (const auto& t : tris_) {
    for (int k = 0; k < 6; ++k) out << t[k] << (k == 5 ? '\n' : ' ');
  }
}

}  // namespace warplab
