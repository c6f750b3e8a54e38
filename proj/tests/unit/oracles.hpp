#pragma once

// Independent reference computations shared by the unit tests. Nothing here
// goes through the library's quadrature or basis tables.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// sqrt(2/L) sin(j pi x / L) and its derivative.
inline double mode(int j, double x, double L) { return std::sqrt(2.0 / L) * std::sin(j * pi * x / L); }
inline double mode_dx(int j, double x, double L) {
  return std::sqrt(2.0 / L) * (j * pi / L) * std::cos(j * pi * x / L);
}

/// Composite trapezoid with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

/// Composite midpoint rule with n cells; no evaluation at the endpoints.
inline double midpoint(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

}  // namespace oracle
