#include "warplab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace warplab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDerivZeroTol = 1e-9;
}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::SpaceformSphere: return "spaceform-sphere";
    case ProfileKind::SpaceformHyperbolic: return "spaceform-hyperbolic";
    case ProfileKind::Euclidean: return "euclidean";
    case ProfileKind::Schwarzschild: return "schwarzschild";
    case ProfileKind::ReissnerNordstrom: return "reissner-nordstrom";
    case ProfileKind::Tabulated: return "tabulated";
  }
  return "?";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "spaceform-sphere") return ProfileKind::SpaceformSphere;
  if (name == "spaceform-hyperbolic") return ProfileKind::SpaceformHyperbolic;
  if (name == "euclidean") return ProfileKind::Euclidean;
  if (name == "schwarzschild") return ProfileKind::Schwarzschild;
  if (name == "reissner-nordstrom") return ProfileKind::ReissnerNordstrom;
  if (name == "tabulated") return ProfileKind::Tabulated;
  throw InvalidParameters("unknown profile kind: " + name);
}

bool HypothesisReport::all_pass() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

double WarpingProfile::radicand(double th) const {
  const int n = params_.n;
  double w = 1.0 + params_.kappa * th * th -
             2.0 * params_.mass * std::pow(th, 1 - n);
  if (kind_ == ProfileKind::ReissnerNordstrom)
    w += params_.charge * params_.charge * std::pow(th, 2 - 2 * n);
  return w;
}

double WarpingProfile::radicand_d1(double th) const {
  const int n = params_.n;
  double w = 2.0 * params_.kappa * th +
             2.0 * params_.mass * (n - 1) * std::pow(th, -n);
  if (kind_ == ProfileKind::ReissnerNordstrom)
    w += params_.charge * params_.charge * (2 - 2 * n) * std::pow(th, 1 - 2 * n);
  return w;
}

double WarpingProfile::radicand_d2(double th) const {
  const int n = params_.n;
  double w = 2.0 * params_.kappa -
             2.0 * params_.mass * n * (n - 1) * std::pow(th, -n - 1);
  if (kind_ == ProfileKind::ReissnerNordstrom)
    w += params_.charge * params_.charge * (2 - 2 * n) * (1 - 2 * n) *
         std::pow(th, -2 * n);
  return w;
}

WarpingProfile WarpingProfile::make(ProfileKind kind,
                                    const ProfileParams& params) {
  WarpingProfile p;
  p.kind_ = kind;
  p.params_ = params;
  if (params.n < 1) throw InvalidParameters("profile: n >= 1 required");

  switch (kind) {
    case ProfileKind::SpaceformSphere:
      p.rbar_ = (params.rbar > 0) ? params.rbar : kPi / 2.0;
      if (p.rbar_ > kPi / 2.0 + 1e-12)
        throw InvalidParameters("spaceform-sphere: rbar <= pi/2 required");
      break;
    case ProfileKind::SpaceformHyperbolic:
    case ProfileKind::Euclidean:
      p.rbar_ = (params.rbar > 0) ? params.rbar : 20.0;
      break;
    case ProfileKind::Schwarzschild:
    case ProfileKind::ReissnerNordstrom:
      if (params.mass <= 0)
        throw InvalidParameters("implicit profile: mass m > 0 required");
      if (kind == ProfileKind::ReissnerNordstrom && params.charge <= 0)
        throw InvalidParameters("reissner-nordstrom: charge q > 0 required");
      if (params.theta_cap <= 0)
        throw InvalidParameters("implicit profile: theta_cap > 0 required");
      p.build_implicit();
      break;
    case ProfileKind::Tabulated:
      p.build_tabulated();
      break;
  }
  return p;
}

void WarpingProfile::build_implicit() {
  // Horizon: the largest positive root of W at which W is increasing, so
  // that theta''(0) = W'(theta0)/2 > 0 and W > 0 just above the root.
  const double cap = params_.theta_cap;
  const int scan = 4000;
  double root = -1.0;
  double lo = cap * 1e-6;
  double prev_th = lo, prev_w = radicand(lo);
  for (int i = 1; i <= scan; ++i) {
    const double th = lo + (cap - lo) * i / scan;
    const double w = radicand(th);
    if (prev_w <= 0.0 && w > 0.0) {
      const double r0 =
          brent_root([this](double t) { return radicand(t); }, prev_th, th);
      root = std::max(root, r0);
    }
    prev_th = th;
    prev_w = w;
  }
  if (root <= 0.0) {
    if (radicand(cap * 1e-6) > 0.0 && radicand(cap) > 0.0)
      throw NoHorizonError(
          "implicit profile: radicand never vanishes below the cap "
          "(no horizon)");
    throw NoHorizonError(
        "implicit profile: no root of the radicand with positive slope "
        "below the cap (no horizon)");
  }
  // Newton polish of the horizon root.
  for (int it = 0; it < 4; ++it) {
    const double w = radicand(root), dw = radicand_d1(root);
    if (dw == 0.0) break;
    root -= w / dw;
  }
  theta0_ = root;
  if (radicand_d1(theta0_) <= 0.0)
    throw NoHorizonError("implicit profile: degenerate horizon (W' <= 0)");

  // Upper end of the theta range: the cap, or just below an outer root of W
  // (cosmological horizon) if one occurs first.
  double theta_hi = cap;
  {
    double th = theta0_ * (1 + 1e-8);
    double w = radicand(th);
    const int probe = 4000;
    for (int i = 1; i <= probe; ++i) {
      const double t2 = theta0_ + (cap - theta0_) * i / probe;
      const double w2 = radicand(t2);
      if (w > 0.0 && w2 <= 0.0) {
        theta_hi = brent_root([this](double t) { return radicand(t); }, th, t2);
        break;
      }
      th = t2;
      w = w2;
    }
  }

  // r(theta) = int_{theta0}^{theta} W^{-1/2}; substituting theta = theta0+u^2
  // removes the square-root singularity at the horizon.
  auto r_integrand_u = [this](double u) {
    const double th = theta0_ + u * u;
    const double w = radicand(th);
    return 2.0 * u / std::sqrt(std::max(w, 1e-300));
  };
  const double margin = (theta_hi < cap) ? 1e-6 * (theta_hi - theta0_) : 0.0;
  const double u_max = std::sqrt(std::max(theta_hi - margin - theta0_, 0.0));

  // Cumulative integral on a fine u-grid, then a dense r-grid with exact
  // slopes theta'(r) = sqrt(W).
  const int M = 6000;
  std::vector<double> us(M + 1), rs(M + 1), ths(M + 1);
  for (int i = 0; i <= M; ++i) us[i] = u_max * i / M;
  rs[0] = 0.0;
  ths[0] = theta0_;
  for (int i = 1; i <= M; ++i) {
    rs[i] = rs[i - 1] + integrate(r_integrand_u, us[i - 1], us[i], 1, 12);
    ths[i] = theta0_ + us[i] * us[i];
  }
  rbar_ = rs[M];
  std::vector<double> slopes(M + 1);
  for (int i = 0; i <= M; ++i)
    slopes[i] = std::sqrt(std::max(radicand(ths[i]), 0.0));
  table_ = HermiteTable(rs, ths, slopes);
  if (params_.rbar > 0) {
    if (params_.rbar > rbar_)
      throw InvalidParameters("implicit profile: requested rbar beyond cap");
    rbar_ = params_.rbar;
  }
}

void WarpingProfile::build_tabulated() {
  const auto& t = params_;
  const size_t m = t.tab_r.size();
  if (m < 4 || t.tab_theta.size() != m || t.tab_d1.size() != m ||
      t.tab_d2.size() != m || t.tab_d3.size() != m)
    throw InvalidParameters("tabulated profile: need >= 4 consistent samples");
  for (size_t i = 1; i < m; ++i)
    if (t.tab_r[i] <= t.tab_r[i - 1])
      throw InvalidParameters("tabulated profile: r samples must increase");
  tab_theta_ = HermiteTable(t.tab_r, t.tab_theta, t.tab_d1);
  tab_d1_ = HermiteTable(t.tab_r, t.tab_d1, t.tab_d2);
  tab_d2_ = HermiteTable(t.tab_r, t.tab_d2, t.tab_d3);
  tab_d3_ = CubicSpline::natural(t.tab_r, t.tab_d3);
  rbar_ = (params_.rbar > 0) ? std::min(params_.rbar, t.tab_r.back())
                             : t.tab_r.back();
}

void WarpingProfile::check_domain(double r) const {
  if (!(r >= 0.0) || r >= rbar_ + 1e-12)
    throw OutOfDomain("profile eval: r outside [0, rbar)");
}

double WarpingProfile::theta_of_r(double r) const { return table_(r); }

double WarpingProfile::eval(double r, int order) const {
  check_domain(r);
  switch (kind_) {
    case ProfileKind::SpaceformSphere:
      switch (order) {
        case 0: return std::sin(r);
        case 1: return std::cos(r);
        case 2: return -std::sin(r);
        case 3: return -std::cos(r);
      }
      break;
    case ProfileKind::SpaceformHyperbolic:
      switch (order) {
        case 0: return std::sinh(r);
        case 1: return std::cosh(r);
        case 2: return std::sinh(r);
        case 3: return std::cosh(r);
      }
      break;
    case ProfileKind::Euclidean:
      switch (order) {
        case 0: return r;
        case 1: return 1.0;
        case 2: return 0.0;
        case 3: return 0.0;
      }
      break;
    case ProfileKind::Schwarzschild:
    case ProfileKind::ReissnerNordstrom: {
      const double th = theta_of_r(r);
      switch (order) {
        case 0: return th;
        case 1: return std::sqrt(std::max(radicand(th), 0.0));
        case 2: return 0.5 * radicand_d1(th);
        case 3:
          return 0.5 * radicand_d2(th) * std::sqrt(std::max(radicand(th), 0.0));
      }
      break;
    }
    case ProfileKind::Tabulated:
      switch (order) {
        case 0: return tab_theta_(r);
        case 1: return tab_d1_(r);
        case 2: return tab_d2_(r);
        case 3: return tab_d3_(r);
      }
      break;
  }
  throw std::invalid_argument("profile eval: order must be 0..3");
}

double WarpingProfile::third_over_first(double r) const {
  check_domain(r);
  switch (kind_) {
    case ProfileKind::SpaceformSphere: return -1.0;
    case ProfileKind::SpaceformHyperbolic: return 1.0;
    case ProfileKind::Euclidean: return 0.0;
    case ProfileKind::Schwarzschild:
    case ProfileKind::ReissnerNordstrom:
      return 0.5 * radicand_d2(theta_of_r(r));
    case ProfileKind::Tabulated: {
      const double v = tab_d1_(r);
      if (std::abs(v) < kDerivZeroTol)
        throw OutOfDomain("tabulated profile: theta' = 0, quotient undefined");
      return tab_d3_(r) / v;
    }
  }
  throw std::logic_error("unreachable");
}

bool WarpingProfile::third_over_first_defined(double r) const {
  if (kind_ != ProfileKind::Tabulated) return true;
  return std::abs(tab_d1_(r)) >= kDerivZeroTol;
}

double WarpingProfile::lap_V_over_V(double r) const {
  // Spaceforms: Hess V = -K V g, so lap V / V = -(n+1) K at every r
  // (including the centre, where the generic quotient is 0/0).
  if (auto K = spaceform_K())
    return -(params_.n + 1.0) * (*K);
  check_domain(r);
  const double th = theta(r);
  return third_over_first(r) + params_.n * d2(r) / th;
}

AmbientCurvature WarpingProfile::ambient_curvature(double r) const {
  check_domain(r);
  const int n = params_.n;
  const double th = eval(r, 0);
  const double th2 = eval(r, 2);
  const double th1 = eval(r, 1);
  AmbientCurvature c{};
  c.ricci_radial = -n * th2 / th;
  c.ricci_tangential = (n - 1) * (1.0 - th1 * th1) / (th * th) - th2 / th;
  c.hessian_defined = third_over_first_defined(r);
  if (c.hessian_defined) {
    c.hessV_spherical = th * th2;
    c.hessV_radial = third_over_first(r);
    c.lapV_over_V = c.hessV_radial + n * th2 / th;
  } else {
    c.hessV_spherical = c.hessV_radial = c.lapV_over_V =
        std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

double WarpingProfile::h3_quantity(double r) const {
  check_domain(r);
  const double th = eval(r, 0), th1 = eval(r, 1), th2 = eval(r, 2);
  return 2.0 * th2 / th - (params_.n - 1) * (1.0 - th1 * th1) / (th * th);
}

HypothesisReport WarpingProfile::check_hypotheses(
    const std::vector<double>& grid, double beta1, double holder_cap) const {
  if (grid.empty())
    throw InvalidParameters("check_hypotheses: empty grid");
  for (double r : grid)
    if (!(r > 0.0) || r >= rbar_)
      throw InvalidParameters("check_hypotheses: grid must lie in (0, rbar)");

  HypothesisReport rep;

  // H1: theta'(0) = 0 and theta''(0) > 0, from the endpoint. For implicit
  // kinds theta'(0) = sqrt(W(theta0)) carries the horizon root residual, so
  // the zero test uses a tolerance well below any genuine slope.
  {
    const double d1_0 = eval(0.0, 1);
    const double d2_0 = eval(0.0, 2);
    const bool pass = std::abs(d1_0) < 1e-6 && d2_0 > 1e-12;
    rep.items.push_back(
        {"H1", pass, 0.0, std::abs(d1_0) < 1e-6 ? d2_0 : d1_0});
  }

  // H2: theta' > 0 on the grid.
  {
    double worst = std::numeric_limits<double>::infinity(), wr = grid.front();
    for (double r : grid) {
      const double v = eval(r, 1);
      if (v < worst) {
        worst = v;
        wr = r;
      }
    }
    rep.items.push_back({"H2", worst > 0.0, wr, worst});
  }

  // H3: the quantity 2 theta''/theta - (n-1)(1-theta'^2)/theta^2 is
  // non-decreasing along the grid (tolerance scaled to its magnitude).
  {
    double scale = 0.0;
    for (double r : grid) scale = std::max(scale, std::abs(h3_quantity(r)));
    const double tol = 1e-10 * std::max(scale, 1.0);
    bool pass = true;
    double wr = grid.front(), wv = 0.0;
    for (size_t i = 1; i < grid.size(); ++i) {
      const double drop = h3_quantity(grid[i - 1]) - h3_quantity(grid[i]);
      if (drop > tol) {
        pass = false;
        if (drop > wv) {
          wv = drop;
          wr = grid[i];
        }
      }
    }
    rep.items.push_back({"H3", pass, wr, pass ? 0.0 : wv});
  }

  // H4: theta''/theta + (1-theta'^2)/theta^2 > 0 on the grid.
  {
    double worst = std::numeric_limits<double>::infinity(), wr = grid.front();
    for (double r : grid) {
      const double th = eval(r, 0), th1 = eval(r, 1), th2 = eval(r, 2);
      const double v = th2 / th + (1.0 - th1 * th1) / (th * th);
      if (v < worst) {
        worst = v;
        wr = r;
      }
    }
    rep.items.push_back({"H4", worst > 0.0, wr, worst});
  }

  // H5: sampled Hoelder quotient of g = theta'''/theta' near r = 0 stays
  // below the cap. The quotient bound is reported as the witness value.
  {
    const double r_near = std::min(grid.back(), rbar_) * 0.25;
    std::vector<double> pts{0.0};
    for (double r : grid)
      if (r <= r_near) pts.push_back(r);
    if (pts.size() < 2) pts.push_back(r_near);
    double sup = 0.0, wr = pts.back();
    bool defined = true;
    for (size_t i = 0; i < pts.size() && defined; ++i) {
      if (!third_over_first_defined(pts[i])) defined = false;
    }
    if (defined) {
      for (size_t i = 0; i + 1 < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
          const double q =
              std::abs(third_over_first(pts[j]) - third_over_first(pts[i])) /
              std::pow(pts[j] - pts[i], beta1);
          if (q > sup) {
            sup = q;
            wr = pts[j];
          }
        }
    }
    rep.items.push_back({"H5", defined && sup < holder_cap, wr, sup});
  }

  return rep;
}

double WarpingProfile::radius_of_theta(double theta_value) const {
  switch (kind_) {
    case ProfileKind::Euclidean:
      return theta_value;
    case ProfileKind::SpaceformHyperbolic:
      return std::asinh(theta_value);
    case ProfileKind::SpaceformSphere:
      if (theta_value < 0 || theta_value > 1)
        throw OutOfDomain("radius_of_theta: sphere needs theta in [0,1]");
      return std::asin(theta_value);
    case ProfileKind::Schwarzschild:
    case ProfileKind::ReissnerNordstrom: {
      if (theta_value < theta0_ || theta_value > table_.back_y())
        throw OutOfDomain("radius_of_theta: theta outside profile range");
      // Bisection on the monotone table, then Newton with dr/dtheta = 1/sqrt(W).
      double lo = 0.0, hi = table_.back_x();
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (theta_of_r(mid) < theta_value ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    case ProfileKind::Tabulated: {
      double lo = tab_theta_.front_x(), hi = tab_theta_.back_x();
      return brent_root(
          [&](double r) { return tab_theta_(r) - theta_value; }, lo, hi);
    }
  }
  throw std::logic_error("unreachable");
}

std::optional<int> WarpingProfile::spaceform_K() const {
  switch (kind_) {
    case ProfileKind::SpaceformSphere: return 1;
    case ProfileKind::SpaceformHyperbolic: return -1;
    case ProfileKind::Euclidean: return 0;
    default: return std::nullopt;
  }
}

}  // namespace warplab
