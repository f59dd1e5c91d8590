#include "warplab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace warplab {

namespace {

QuadRule compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: npts >= 1");
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

}  // namespace

const QuadRule& gauss_legendre(int npts) {
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(npts);
  if (it == cache.end()) it = cache.emplace(npts, compute_gauss_legendre(npts)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int npts) {
  const QuadRule& q = gauss_legendre(npts);
  const double dx = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * dx;
    double acc = 0.0;
    for (size_t k = 0; k < q.x.size(); ++k)
      acc += q.w[k] * f(x0 + 0.5 * dx * (q.x[k] + 1.0));
    total += 0.5 * dx * acc;
  }
  return total;
}

namespace {
double adapt_rec(const std::function<double(double)>& f, double a, double b,
                 double whole, double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const double left = integrate(f, a, mid, 1, 10);
  const double right = integrate(f, mid, b, 1, 10);
  const double delta = left + right - whole;
  if (depth >= max_depth || std::abs(delta) <= tol * (1.0 + std::abs(left + right)))
    return left + right;
  return adapt_rec(f, a, mid, left, 0.5 * tol, depth + 1, max_depth) +
         adapt_rec(f, mid, b, right, 0.5 * tol, depth + 1, max_depth);
}
}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double whole = integrate(f, a, b, 1, 10);
  return adapt_rec(f, a, b, whole, tol, 0, max_depth);
}

// ---------------------------------------------------------------------------
// Hermite tables

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y,
                           std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
  if (x_.size() != y_.size() || x_.size() != dy_.size() || x_.size() < 2)
    throw std::invalid_argument("HermiteTable: inconsistent sizes");
}

int HermiteTable::locate(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double HermiteTable::operator()(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * dy_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * dy_[i + 1];
}

double HermiteTable::derivative(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (3 * t2 - 4 * t + 1) * h * dy_[i] +
          (-6 * t2 + 6 * t) * y_[i + 1] + (3 * t2 - 2 * t) * h * dy_[i + 1]) /
         h;
}

QuinticTable::QuinticTable(std::vector<double> x, std::vector<double> y,
                           std::vector<double> dy, std::vector<double> ddy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)), ddy_(std::move(ddy)) {
  if (x_.size() != y_.size() || x_.size() != dy_.size() ||
      x_.size() != ddy_.size() || x_.size() < 2)
    throw std::invalid_argument("QuinticTable: inconsistent sizes");
}

int QuinticTable::locate(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

namespace {
// Quintic Hermite basis on [0,1] for (y0,dy0,ddy0,y1,dy1,ddy1).
inline void quintic_coeffs(double t, double* b, double* db, double* ddb) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  if (b) {
    b[0] = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    b[1] = t - 6 * t3 + 8 * t4 - 3 * t5;
    b[2] = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    b[3] = 10 * t3 - 15 * t4 + 6 * t5;
    b[4] = -4 * t3 + 7 * t4 - 3 * t5;
    b[5] = 0.5 * t3 - t4 + 0.5 * t5;
  }
  if (db) {
    db[0] = -30 * t2 + 60 * t3 - 30 * t4;
    db[1] = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    db[2] = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
    db[3] = 30 * t2 - 60 * t3 + 30 * t4;
    db[4] = -12 * t2 + 28 * t3 - 15 * t4;
    db[5] = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  }
  if (ddb) {
    ddb[0] = -60 * t + 180 * t2 - 120 * t3;
    ddb[1] = -36 * t + 96 * t2 - 60 * t3;
    ddb[2] = 1 - 9 * t + 18 * t2 - 10 * t3;
    ddb[3] = 60 * t - 180 * t2 + 120 * t3;
    ddb[4] = -24 * t + 84 * t2 - 60 * t3;
    ddb[5] = 3 * t - 8 * t2 + 10 * t3;
  }
}
}  // namespace

double QuinticTable::operator()(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  double b[6];
  quintic_coeffs(t, b, nullptr, nullptr);
  return b[0] * y_[i] + b[1] * h * dy_[i] + b[2] * h * h * ddy_[i] +
         b[3] * y_[i + 1] + b[4] * h * dy_[i + 1] + b[5] * h * h * ddy_[i + 1];
}

double QuinticTable::derivative(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  double db[6];
  quintic_coeffs(t, nullptr, db, nullptr);
  return (db[0] * y_[i] + db[1] * h * dy_[i] + db[2] * h * h * ddy_[i] +
          db[3] * y_[i + 1] + db[4] * h * dy_[i + 1] +
          db[5] * h * h * ddy_[i + 1]) /
         h;
}

double QuinticTable::second_derivative(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  double ddb[6];
  quintic_coeffs(t, nullptr, nullptr, ddb);
  return (ddb[0] * y_[i] + ddb[1] * h * dy_[i] + ddb[2] * h * h * ddy_[i] +
          ddb[3] * y_[i + 1] + ddb[4] * h * dy_[i + 1] +
          ddb[5] * h * h * ddy_[i + 1]) /
         (h * h);
}

// ---------------------------------------------------------------------------
// Cubic spline

namespace {
std::vector<double> spline_moments(const std::vector<double>& x,
                                   const std::vector<double>& y, bool clamped,
                                   double sa, double sb) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size())
    throw std::invalid_argument("CubicSpline: need >= 3 points");
  std::vector<double> a(n), b(n), c(n), d(n), m(n);
  // Tridiagonal system for second derivatives m.
  for (int i = 1; i < n - 1; ++i) {
    a[i] = (x[i] - x[i - 1]) / 6.0;
    b[i] = (x[i + 1] - x[i - 1]) / 3.0;
    c[i] = (x[i + 1] - x[i]) / 6.0;
    d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) -
           (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
  }
  if (clamped) {
    b[0] = (x[1] - x[0]) / 3.0;
    c[0] = (x[1] - x[0]) / 6.0;
    d[0] = (y[1] - y[0]) / (x[1] - x[0]) - sa;
    a[n - 1] = (x[n - 1] - x[n - 2]) / 6.0;
    b[n - 1] = (x[n - 1] - x[n - 2]) / 3.0;
    d[n - 1] = sb - (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
  } else {
    b[0] = 1.0;
    c[0] = 0.0;
    d[0] = 0.0;
    a[n - 1] = 0.0;
    b[n - 1] = 1.0;
    d[n - 1] = 0.0;
  }
  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m[n - 1] = d[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
  return m;
}
}  // namespace

CubicSpline CubicSpline::natural(std::vector<double> x, std::vector<double> y) {
  auto m = spline_moments(x, y, false, 0, 0);
  return CubicSpline(std::move(x), std::move(y), std::move(m));
}
CubicSpline CubicSpline::clamped(std::vector<double> x, std::vector<double> y,
                                 double sa, double sb) {
  auto m = spline_moments(x, y, true, sa, sb);
  return CubicSpline(std::move(x), std::move(y), std::move(m));
}

int CubicSpline::locate(double xq) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double CubicSpline::operator()(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return A * y_[i] + B * y_[i + 1] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((1 - 3 * A * A) * m_[i] + (3 * B * B - 1) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::second_derivative(double xq) const {
  const int i = locate(xq);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - xq) / h, B = (xq - x_[i]) / h;
  return A * m_[i] + B * m_[i + 1];
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

OdeStatus ode45(const OdeRhs& rhs, int dim, double t0, double t1, double* y,
                const OdeOptions& opt, const OdeObserver& observer) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  double t = t0;
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
      k7(dim), ytmp(dim), ynew(dim);
  rhs(t, y, k1.data());
  if (observer) observer(t, y, k1.data());
  double h = (opt.max_step > 0 ? opt.max_step : std::abs(t1 - t0) / 100.0);
  h = std::min(h, std::abs(t1 - t0));
  if (h <= 0) return {true, ""};

  for (int step = 0; step < opt.max_steps; ++step) {
    if (dir * (t - t1) >= 0) return {true, ""};
    h = std::min(h, std::abs(t1 - t));
    const double hs = dir * h;

    for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, ytmp.data(), k2.data());
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, ytmp.data(), k3.data());
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, ytmp.data(), k4.data());
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, ytmp.data(), k5.data());
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
    rhs(t + hs, ytmp.data(), k6.data());
    for (int i = 0; i < dim; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                             b6 * k6[i]);
    rhs(t + hs, ynew.data(), k7.data());

    double err = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                              e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / dim);

    if (err <= 1.0 || h <= 1e-14 * std::abs(t1 - t0)) {
      t += hs;
      std::copy(ynew.begin(), ynew.end(), y);
      std::swap(k1, k7);
      if (observer) observer(t, y, k1.data());
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::clamp(fac, 0.2, 5.0);
    h *= fac;
    if (opt.max_step > 0) h = std::min(h, opt.max_step);
    if (!std::isfinite(err) || !std::isfinite(h))
      return {false, "ode45: step size collapsed (non-finite error)"};
  }
  return {false, "ode45: max step count exceeded"};
}

// ---------------------------------------------------------------------------
// Root finding

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (fa * fb > 0) throw std::invalid_argument("brent_root: no sign change");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r2;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, rr = fb / fc;
        p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      r2 = std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q));
      if (2.0 * p < r2) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double unit_sphere_volume(int k) {
  if (k < 0) throw std::invalid_argument("unit_sphere_volume: k >= 0");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) /
         std::tgamma(0.5 * (k + 1));
}

}  // namespace warplab
