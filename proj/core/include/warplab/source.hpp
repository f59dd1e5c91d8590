#pragma once

// Source term phi(f) of the semilinear problem, together with its
// antiderivatives  Phi(f) = int_0^f phi,  Psi(f) = int_0^f Phi.
// Closed forms are used for the built-in sources; the generic constructor
// falls back to adaptive quadrature.

#include <cmath>
#include <functional>
#include <string>

#include "warplab/numerics.hpp"

namespace warplab {

struct SourceSpec {
  std::string name = "one";
  std::function<double(double)> phi = [](double) { return 1.0; };
  std::function<double(double)> dphi = [](double) { return 0.0; };
  std::function<double(double)> Phi = [](double f) { return f; };
  std::function<double(double)> Psi = [](double f) { return 0.5 * f * f; };

  static SourceSpec one() { return SourceSpec{}; }

  // phi(f) = 1 + alpha f
  static SourceSpec affine(double alpha) {
    SourceSpec s;
    s.name = "affine:" + std::to_string(alpha);
    s.phi = [alpha](double f) { return 1.0 + alpha * f; };
    s.dphi = [alpha](double) { return alpha; };
    s.Phi = [alpha](double f) { return f + 0.5 * alpha * f * f; };
    s.Psi = [alpha](double f) {
      return 0.5 * f * f + alpha * f * f * f / 6.0;
    };
    return s;
  }

  // phi(f) = e^f
  static SourceSpec exponential() {
    SourceSpec s;
    s.name = "exp";
    s.phi = [](double f) { return std::exp(f); };
    s.dphi = [](double f) { return std::exp(f); };
    s.Phi = [](double f) { return std::expm1(f); };
    s.Psi = [](double f) { return std::expm1(f) - f; };
    return s;
  }

  // phi(f) = 1 + f^2
  static SourceSpec quadratic() {
    SourceSpec s;
    s.name = "quadratic";
    s.phi = [](double f) { return 1.0 + f * f; };
    s.dphi = [](double f) { return 2.0 * f; };
    s.Phi = [](double f) { return f + f * f * f / 3.0; };
    s.Psi = [](double f) { return 0.5 * f * f + f * f * f * f / 12.0; };
    return s;
  }

  // Generic source: antiderivatives by adaptive quadrature.
  static SourceSpec from_phi(std::function<double(double)> phi,
                             std::function<double(double)> dphi,
                             std::string name = "custom") {
    SourceSpec s;
    s.name = std::move(name);
    s.phi = phi;
    s.dphi = std::move(dphi);
    s.Phi = [phi](double f) {
      if (f == 0.0) return 0.0;
      return integrate_adaptive(phi, 0.0, f, 1e-13);
    };
    auto Phi_fn = s.Phi;
    s.Psi = [Phi_fn](double f) {
      if (f == 0.0) return 0.0;
      return integrate_adaptive(Phi_fn, 0.0, f, 1e-12);
    };
    return s;
  }
};

}  // namespace warplab
