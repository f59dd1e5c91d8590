#pragma once

// Small numerical kernels shared across the library: Gauss-Legendre rules,
// adaptive 1-D quadrature, Hermite/spline interpolation, an adaptive
// Dormand-Prince integrator, and scalar root finding.

#include <functional>
#include <string>
#include <vector>

namespace warplab {

struct QuadRule {
  std::vector<double> x;  // nodes on [-1,1]
  std::vector<double> w;
};

// Nodes/weights computed once per order by Newton iteration on Legendre
// polynomials; cached.
const QuadRule& gauss_legendre(int npts);

// Composite Gauss-Legendre on [a,b] with `panels` equal panels.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels = 32, int npts = 8);

// Adaptive panel bisection, absolute/relative tolerance `tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12, int max_depth = 40);

// Cubic Hermite table on a strictly increasing grid with exact slopes.
class HermiteTable {
 public:
  HermiteTable() = default;
  HermiteTable(std::vector<double> x, std::vector<double> y,
               std::vector<double> dy);
  double operator()(double xq) const;
  double derivative(double xq) const;
  double front_x() const { return x_.front(); }
  double back_x() const { return x_.back(); }
  double front_y() const { return y_.front(); }
  double back_y() const { return y_.back(); }
  bool empty() const { return x_.empty(); }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, dy_;
  int locate(double xq) const;
};

// Quintic Hermite table: values, slopes and curvatures at the nodes.
class QuinticTable {
 public:
  QuinticTable() = default;
  QuinticTable(std::vector<double> x, std::vector<double> y,
               std::vector<double> dy, std::vector<double> ddy);
  double operator()(double xq) const;
  double derivative(double xq) const;
  double second_derivative(double xq) const;
  double front_x() const { return x_.front(); }
  double back_x() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_, y_, dy_, ddy_;
  int locate(double xq) const;
};

// Plain cubic spline (natural or clamped end conditions).
class CubicSpline {
 public:
  CubicSpline() = default;
  static CubicSpline natural(std::vector<double> x, std::vector<double> y);
  static CubicSpline clamped(std::vector<double> x, std::vector<double> y,
                             double slope_a, double slope_b);
  double operator()(double xq) const;
  double derivative(double xq) const;
  double second_derivative(double xq) const;
  bool empty() const { return x_.empty(); }

 private:
  CubicSpline(std::vector<double> x, std::vector<double> y,
              std::vector<double> m)
      : x_(std::move(x)), y_(std::move(y)), m_(std::move(m)) {}
  std::vector<double> x_, y_, m_;  // m_: second derivatives at nodes
  int locate(double xq) const;
};

// Adaptive Dormand-Prince 5(4). The observer is called after every accepted
// step with (t, y, dy/dt).
struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  double max_step = 0.0;  // 0 = unrestricted
  int max_steps = 2000000;
};
using OdeRhs = std::function<void(double t, const double* y, double* dydt)>;
using OdeObserver =
    std::function<void(double t, const double* y, const double* dydt)>;

struct OdeStatus {
  bool ok = true;
  std::string message;
};
OdeStatus ode45(const OdeRhs& rhs, int dim, double t0, double t1, double* y,
                const OdeOptions& opt, const OdeObserver& observer = nullptr);

// Root bracketing + Brent. Requires f(a)*f(b) <= 0.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-14);

// Least-squares slope of log(y) against log(x); ignores non-positive pairs.
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

// Volume of the unit k-sphere S^k, |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double unit_sphere_volume(int k);

}  // namespace warplab
