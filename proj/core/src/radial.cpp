#include "warplab/radial.hpp"

#include <cmath>
#include <vector>

namespace warplab {

namespace {

struct Trace {
  std::vector<double> r, y0, y1, y2, y3;  // components plus their slopes
};

// Assemble dense tables for f = comp0 + sigma * comp1 of a two-component
// trajectory, with f'' recomputed from the ODE right-hand side.
RadialSolution combine(const std::vector<double>& r,
                       const std::vector<double>& p,
                       const std::vector<double>& dp,
                       const std::vector<double>& h,
                       const std::vector<double>& dh, double sigma,
                       const std::function<double(double, double, double)>& fpp) {
  RadialSolution sol;
  const size_t m = r.size();
  std::vector<double> f(m), df(m), ddf(m);
  for (size_t i = 0; i < m; ++i) {
    f[i] = p[i] + sigma * h[i];
    df[i] = dp[i] + sigma * dh[i];
    ddf[i] = fpp(r[i], f[i], df[i]);
  }
  sol.f = QuinticTable(r, f, df, ddf);
  sol.df = HermiteTable(r, df, ddf);
  sol.R = r.back();
  sol.f0 = f.front();
  sol.f_nu = df.back();
  sol.ok = true;
  return sol;
}

}  // namespace

RadialSolution radial_serrin(const WarpingProfile& profile,
                             const SourceSpec& source, double R, double tol) {
  RadialSolution out;
  const auto Kopt = profile.spaceform_K();
  if (!Kopt || *Kopt == 0) {
    out.message = "radial_serrin: spaceform profile with K = +-1 required";
    return out;
  }
  const int K = *Kopt;
  const int n = profile.n();
  if (!(R > 0) || R >= profile.rbar()) {
    out.message = "radial_serrin: R outside (0, rbar)";
    return out;
  }

  auto fpp = [&](double r, double f, double df) {
    return source.phi(f) - (n + 1.0) * K * f -
           n * profile.d1(r) / profile.theta(r) * df;
  };

  const double eps = 1e-3;
  // Series start at the regular centre:
  //   f = a + b r^2/2 + c r^4/24,  b = (phi(a)-(n+1)Ka)/(n+1),
  //   c = 3 phi'(a) b/(n+3) - K b.
  auto start = [&](double a, double* y) {
    const double b = (source.phi(a) - (n + 1.0) * K * a) / (n + 1.0);
    const double c = 3.0 * source.dphi(a) * b / (n + 3.0) - K * b;
    y[0] = a + 0.5 * b * eps * eps + c * eps * eps * eps * eps / 24.0;
    y[1] = b * eps + c * eps * eps * eps / 6.0;
  };

  OdeOptions opt;
  opt.rtol = tol * 1e-1;
  opt.atol = tol * 1e-2;
  opt.max_step = 0.01;

  struct Shot {
    double fR;
    std::vector<double> r, f, df;
    bool ok;
  };
  auto shoot = [&](double a) {
    Shot sh;
    sh.ok = true;
    double y[2];
    start(a, y);
    sh.r.clear();
    auto rhs = [&](double r, const double* y, double* dy) {
      dy[0] = y[1];
      dy[1] = fpp(r, y[0], y[1]);
    };
    auto obs = [&](double r, const double* y, const double*) {
      sh.r.push_back(r);
      sh.f.push_back(y[0]);
      sh.df.push_back(y[1]);
    };
    OdeStatus st = ode45(rhs, 2, eps, R, y, opt, obs);
    sh.ok = st.ok && std::isfinite(y[0]) && std::abs(y[0]) < 1e8;
    sh.fR = y[0];
    return sh;
  };

  // Initial guess from the phi = 1 closed form f = (1 - V/V(R))/((n+1)K).
  double a = (1.0 - 1.0 / profile.d1(R)) / ((n + 1.0) * K);
  Shot sh = shoot(a);
  if (!sh.ok) {
    out.message = "radial_serrin: trajectory blow-up at initial guess";
    return out;
  }
  bool converged = false;
  for (int it = 0; it < 60; ++it) {
    if (std::abs(sh.fR) < tol * std::max(1.0, std::abs(a))) {
      converged = true;
      break;
    }
    const double da = 1e-7 * std::max(1.0, std::abs(a));
    Shot sh2 = shoot(a + da);
    if (!sh2.ok) {
      out.message = "radial_serrin: trajectory blow-up during Newton";
      return out;
    }
    const double slope = (sh2.fR - sh.fR) / da;
    if (slope == 0.0 || !std::isfinite(slope)) break;
    double step = -sh.fR / slope;
    // Damping against overshoot.
    for (int half = 0; half < 40; ++half) {
      Shot trial = shoot(a + step);
      if (trial.ok && std::abs(trial.fR) < std::abs(sh.fR)) {
        a += step;
        sh = trial;
        break;
      }
      step *= 0.5;
      if (half == 39) {
        out.message = "radial_serrin: shooting stalled (possible blow-up)";
        return out;
      }
    }
  }
  if (!converged && std::abs(sh.fR) > 1e3 * tol) {
    out.message = "radial_serrin: shooting did not converge";
    return out;
  }

  // Prepend the series segment [0, eps] so the tables start at r = 0.
  std::vector<double> r{0.0}, f, df, ddf;
  {
    const double b = (source.phi(a) - (n + 1.0) * K * a) / (n + 1.0);
    const double c = 3.0 * source.dphi(a) * b / (n + 3.0) - K * b;
    f = {a};
    df = {0.0};
    ddf = {b};
    const int pre = 4;
    for (int i = 1; i < pre; ++i) {
      const double rr = eps * i / pre;
      r.push_back(rr);
      f.push_back(a + 0.5 * b * rr * rr + c * rr * rr * rr * rr / 24.0);
      df.push_back(b * rr + c * rr * rr * rr / 6.0);
      ddf.push_back(b + 0.5 * c * rr * rr);
    }
    for (size_t i = 0; i < sh.r.size(); ++i) {
      r.push_back(sh.r[i]);
      f.push_back(sh.f[i]);
      df.push_back(sh.df[i]);
      ddf.push_back(fpp(sh.r[i], sh.f[i], sh.df[i]));
    }
  }
  out.f = QuinticTable(r, f, df, ddf);
  out.df = HermiteTable(r, df, ddf);
  out.R = R;
  out.f0 = a;
  out.f_nu = df.back();
  out.ok = true;
  return out;
}

RadialSolution radial_torsion(const WarpingProfile& profile, double R,
                              double tol) {
  RadialSolution out;
  const int n = profile.n();
  if (!(R > 0) || R >= profile.rbar()) {
    out.message = "radial_torsion: R outside (0, rbar)";
    return out;
  }
  const double th0 = profile.theta(0.0);
  const bool inner = th0 > 1e-12;

  auto coeff = [&](double r) { return profile.lap_V_over_V(r); };
  auto fpp = [&](double r, double f, double df, double rhs1) {
    return rhs1 + coeff(r) * f - n * profile.d1(r) / profile.theta(r) * df;
  };

  OdeOptions opt;
  opt.rtol = tol * 1e-1;
  opt.atol = tol * 1e-2;
  opt.max_step = 0.01;

  std::vector<double> rs, p, dp, hh, dhh;
  auto rhs4 = [&](double r, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = fpp(r, y[0], y[1], 1.0);  // particular: rhs 1
    dy[2] = y[3];
    dy[3] = fpp(r, y[2], y[3], 0.0);  // homogeneous
  };
  auto obs = [&](double r, const double* y, const double*) {
    rs.push_back(r);
    p.push_back(y[0]);
    dp.push_back(y[1]);
    hh.push_back(y[2]);
    dhh.push_back(y[3]);
  };

  double y[4];
  double r_start;
  if (inner) {
    // Regular start at the inner slice: f(0) prescribed, f'(0) free.
    // c0 = -theta(0)/((n+1) theta''(0)).
    const double c0 = -th0 / ((n + 1.0) * profile.d2(0.0));
    r_start = 0.0;
    y[0] = c0;
    y[1] = 0.0;
    y[2] = 0.0;
    y[3] = 1.0;
    out.f0 = c0;
  } else {
    // Regular centre of a spaceform: even series start, f(0) free.
    const auto Kopt = profile.spaceform_K();
    const int K = Kopt ? *Kopt : 0;
    const double eps = 1e-3;
    r_start = eps;
    const double bp = 1.0 / (n + 1.0), dpp = -K * bp;        // a = 0 branch
    const double bh = -static_cast<double>(K), dh = K * K;   // a = 1 branch
    y[0] = 0.5 * bp * eps * eps + dpp * eps * eps * eps * eps / 24.0;
    y[1] = bp * eps + dpp * eps * eps * eps / 6.0;
    y[2] = 1.0 + 0.5 * bh * eps * eps + dh * eps * eps * eps * eps / 24.0;
    y[3] = bh * eps + dh * eps * eps * eps / 6.0;
  }

  OdeStatus st = ode45(rhs4, 4, r_start, R, y, opt, obs);
  if (!st.ok) {
    out.message = "radial_torsion: " + st.message;
    return out;
  }
  const double denom = y[2];
  if (std::abs(denom) < 1e-14) {
    out.message = "radial_torsion: singular superposition (homogeneous "
                  "solution vanishes at R)";
    return out;
  }
  const double sigma = -y[0] / denom;

  if (!inner) {
    // Prepend the centre point: f(0) = sigma (the a = 1 branch carries the
    // centre value), f'(0) = 0.
    rs.insert(rs.begin(), 0.0);
    p.insert(p.begin(), 0.0);
    dp.insert(dp.begin(), 0.0);
    hh.insert(hh.begin(), 1.0);
    dhh.insert(dhh.begin(), 0.0);
  }
  auto fpp_full = [&](double r, double f, double df) {
    if (r == 0.0 && !inner) {
      // Regular centre: lap f (0) = (n+1) f''(0).
      return (1.0 + coeff(0.0) * f) / (n + 1.0);
    }
    return fpp(r, f, df, 1.0);
  };
  out = combine(rs, p, dp, hh, dhh, sigma, fpp_full);
  return out;
}

RadialSolution radial_oracle(RadialProblem problem,
                             const WarpingProfile& profile,
                             const SourceSpec& source, double R, double tol) {
  switch (problem) {
    case RadialProblem::Serrin:
      return radial_serrin(profile, source, R, tol);
    case RadialProblem::WarpedTorsion:
      return radial_torsion(profile, R, tol);
  }
  throw std::logic_error("unreachable");
}

}  // namespace warplab
