#pragma once

#include <functional>
#include <span>

namespace resv::quad {

struct Tolerance {
  double absolute = 1e-9;
  double relative = 1e-8;
};

/// Adaptive Gauss–Kronrod (15-point) integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 Tolerance tol = {});

/// Same, but splits [a, b] at the given interior breakpoints first (values
/// outside (a, b) are ignored). Useful when the mass of f is concentrated.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints, Tolerance tol = {});

}  // namespace resv::quad
