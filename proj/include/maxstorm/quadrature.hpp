#pragma once

#include <functional>
#include <vector>

namespace maxstorm::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (15 point) on [a, b] until the error estimate is
// below max(abs_tol, rel_tol |I|). Optional interior breakpoints split the
// interval at known kinks of the integrand.
Result integrate_1d(const std::function<double(double)>& f, double a, double b, double rel_tol,
                    const std::vector<double>& breakpoints = {}, double abs_tol = 0.0);

// Iterated adaptive quadrature over [ax, bx] x [ay, by].
Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                    double by, double rel_tol);

}  // namespace maxstorm::quadrature
