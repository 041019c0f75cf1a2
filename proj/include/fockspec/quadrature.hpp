#pragma once

#include <functional>

#include "fockspec/common.hpp"

namespace fockspec {

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0;  // estimate from the final bisection pass
    bool converged = false;
    int panels = 0;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_depth = 28;
    int min_depth = 2;  // forces at least one refinement check everywhere
};

// Adaptive panel integration, 15-point Gauss-Legendre per panel, error
// estimated by comparing a panel against its two halves. Deterministic:
// the recursion order is fixed and no randomness is involved.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

// Same, but throws QuadratureError on refinement stall, carrying the
// achieved error estimate.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadOptions& opt = {});

// Trapezoid rule on [0, 2pi) with doubling until the relative change is
// below tol. Exact for short trigonometric polynomials long before that.
double periodic_mean(const std::function<double(double)>& f, double tol = 1e-12,
                     int n0 = 16, int n_max = 1 << 16);

}  // namespace fockspec
