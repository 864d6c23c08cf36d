#include "lamination/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lamination/errors.hpp"

namespace lamination::numerics {

RootResult brent_root(const ScalarFn& f, double a, double b, double x_tol, int max_iterations) {
    return brent_root(f, a, f(a), b, f(b), x_tol, max_iterations);
}

RootResult brent_root(const ScalarFn& f, double a, double fa, double b, double fb, double x_tol,
                      int max_iterations) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (fa == 0.0) return {a, fa, 0, true};
    if (fb == 0.0) return {b, fb, 0, true};
    if ((fa > 0.0) == (fb > 0.0)) {
        throw NoBracket("brent_root: endpoints do not bracket a root",
                        {{"a", format_double(a)}, {"b", format_double(b)}});
    }

    double c = b, fc = fb;
    double d = b - a, e = d;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, iter, true};

        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic interpolation, or secant when only two points differ
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
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
        b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    return {b, fb, max_iterations, false};
}

MaxResult golden_section_max(const ScalarFn& f, double a, double b, double x_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (std::abs(b - a) > x_tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? MaxResult{x1, f1} : MaxResult{x2, f2};
}

namespace {

struct SimpsonState {
    const ScalarFn& f;
    int max_depth;
    bool exhausted = false;
};

double simpson_step(SimpsonState& st, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = st.f(lm), frm = st.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= st.max_depth) {
        st.exhausted = true;
        return left + right + delta / 15.0;
    }
    return simpson_step(st, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
           simpson_step(st, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    SimpsonState st{f, max_depth};
    const double value = simpson_step(st, a, fa, m, fm, b, fb, whole, abs_tol, 0);
    if (st.exhausted || !std::isfinite(value)) {
        throw QuadratureError("adaptive_simpson: tolerance unreachable",
                              {{"a", format_double(a)}, {"b", format_double(b)}, {"tol", format_double(abs_tol)}});
    }
    return value;
}

const GaussLegendreRule& gauss_legendre_64() {
    static const GaussLegendreRule rule = [] {
        GaussLegendreRule r;
        constexpr int n = kGaussLegendreNodes;
        for (int i = 0; i < n / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - z * z) * dp * dp);
            r.nodes[i] = -z;
            r.nodes[n - 1 - i] = z;
            r.weights[i] = w;
            r.weights[n - 1 - i] = w;
        }
        return r;
    }();
    return rule;
}

double gauss_legendre(const ScalarFn& f, double a, double b, int panels) {
    const auto& rule = gauss_legendre_64();
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width, mid = lo + half;
        double sum = 0.0;
        for (int j = 0; j < kGaussLegendreNodes; ++j) sum += rule.weights[j] * f(mid + half * rule.nodes[j]);
        total += half * sum;
    }
    return total;
}

double gauss_legendre_refined(const ScalarFn& f, double a, double b, double abs_tol, int max_panels) {
    double previous = gauss_legendre(f, a, b, 1);
    for (int panels = 2; panels <= max_panels; panels *= 2) {
        const double current = gauss_legendre(f, a, b, panels);
        if (std::abs(current - previous) < abs_tol) return current;
        previous = current;
    }
    throw ToleranceError("gauss_legendre_refined: successive estimates did not agree",
                         {{"a", format_double(a)}, {"b", format_double(b)}, {"tol", format_double(abs_tol)}});
}

}  // namespace lamination::numerics
