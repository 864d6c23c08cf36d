#pragma once

#include <array>
#include <functional>

namespace lamination::numerics {

using ScalarFn = std::function<double(double)>;

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Brent's method on a bracket [a, b] with f(a)*f(b) <= 0. Stops when the
// bracket half-width drops below `x_tol` or f hits zero exactly.
RootResult brent_root(const ScalarFn& f, double a, double b, double x_tol, int max_iterations = 200);

// Same, reusing already evaluated endpoint values.
RootResult brent_root(const ScalarFn& f, double a, double fa, double b, double fb, double x_tol,
                      int max_iterations = 200);

struct MaxResult {
    double x = 0.0;
    double fx = 0.0;
};

// Golden-section search for a maximum of a unimodal f on [a, b].
MaxResult golden_section_max(const ScalarFn& f, double a, double b, double x_tol);

// Adaptive Simpson quadrature with an absolute tolerance.
// Throws QuadratureError when the recursion limit is hit before convergence.
double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol, int max_depth = 50);

inline constexpr int kGaussLegendreNodes = 64;

struct GaussLegendreRule {
    std::array<double, kGaussLegendreNodes> nodes{};    // on [-1, 1]
    std::array<double, kGaussLegendreNodes> weights{};
};

const GaussLegendreRule& gauss_legendre_64();

// Composite 64-node Gauss-Legendre rule over `panels` equal panels of [a, b].
double gauss_legendre(const ScalarFn& f, double a, double b, int panels = 1);

// Doubles the panel count until successive estimates differ by less than
// `abs_tol`. Throws ToleranceError after `max_panels` without agreement.
double gauss_legendre_refined(const ScalarFn& f, double a, double b, double abs_tol, int max_panels = 1024);

}  // namespace lamination::numerics
