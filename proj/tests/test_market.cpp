#include <doctest.h>

#include <cmath>
#include <vector>

#include "lamination/errors.hpp"
#include "lamination/market.hpp"

using namespace lamination;

namespace {

// Hand antiderivatives, kept independent of the library.
double cpmm_cost(double x) { return (x - 1.0) + (1.0 / x - 1.0); }
double exp_cost(double x) { return (x - 1.0) + (std::exp(-2.0 * (x - 1.0)) - 1.0) / 2.0; }

std::vector<MarketCurve> all_kinds() {
    CustomCurve c;
    c.phi = [](double x) { return 1.0 / (1.0 + x * x); };
    c.label = "lorentz";
    return {MarketCurve::cpmm(1, 1),
            MarketCurve::cpmm(1, 3),
            MarketCurve::exponential(2.0, 1.0, 1.0),
            MarketCurve::exponential(0.7, 1.0, 5.0),
            MarketCurve::reference(1.5),
            MarketCurve::custom(c, {0.01, 100.0})};
}

}  // namespace

TEST_CASE("phi values") {
    const auto cpmm = MarketCurve::cpmm(1, 1);
    CHECK(cpmm.phi(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cpmm.phi(2.0) == doctest::Approx(0.25).epsilon(1e-15));
    const auto ex = MarketCurve::exponential(2.0, 1.0, 1.0);
    CHECK(ex.phi(1.1) == doctest::Approx(std::exp(-0.2)).epsilon(1e-15));
    CHECK(ex.phi(1.1) == doctest::Approx(0.818731).epsilon(1e-6));
    CHECK_THROWS_AS(cpmm.phi(-1.0), DomainError);
    CHECK_THROWS_AS(cpmm.phi(2e6), DomainError);
}

TEST_CASE("action closed forms") {
    const auto cpmm = MarketCurve::cpmm(1, 1);
    CHECK(cpmm.action(1.0, 1.0) == 0.0);
    CHECK(cpmm.action(1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cpmm.action(2.0, 1.0) == doctest::Approx(-0.5).epsilon(1e-14));
    // weighted: integral of x^-(1+1/3) from 1 to 2 = 3 (1 - 2^-1/3)
    const auto w = MarketCurve::cpmm(1, 3);
    CHECK(w.action(1.0, 2.0) == doctest::Approx(3.0 * (1.0 - std::pow(2.0, -1.0 / 3.0))).epsilon(1e-13));
}

TEST_CASE("action antisymmetry and additivity on every kind") {
    for (const auto& m : all_kinds()) {
        for (double x : {0.5, 0.9, 1.3}) {
            for (double y : {0.7, 1.1, 1.9}) {
                CHECK(m.action(x, y) == doctest::Approx(-m.action(y, x)).epsilon(1e-10));
                const double z = 1.6;
                CHECK(m.action(x, z) == doctest::Approx(m.action(x, y) + m.action(y, z)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("custom kind without antiderivative matches quadrature oracle") {
    CustomCurve c;
    c.phi = [](double x) { return 1.0 / (1.0 + x * x); };
    const auto m = MarketCurve::custom(c, {0.01, 100.0});
    CHECK(m.action(0.5, 2.0) == doctest::Approx(std::atan(2.0) - std::atan(0.5)).epsilon(1e-11));
    CHECK_FALSE(m.has_closed_form_antiderivative());

    CustomCurve bad;
    bad.phi = [](double x) { return x; };
    CHECK_THROWS(MarketCurve::custom(bad, {0.1, 10.0}));
}

TEST_CASE("opportunity cost and derivative") {
    const CostContext cpmm(MarketCurve::cpmm(1, 1), 1.0);
    CHECK(cpmm.cost(1.0) == 0.0);
    CHECK(cpmm.cost(2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cpmm.cost(0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cpmm.cost_derivative(1.0) == 0.0);
    CHECK(cpmm.cost_derivative(2.0) == doctest::Approx(0.75).epsilon(1e-15));
    for (double x : {0.6, 0.95, 1.09, 1.7}) CHECK(cpmm.cost(x) == doctest::Approx(cpmm_cost(x)).epsilon(1e-12));

    const CostContext ex(MarketCurve::exponential(2.0), 1.0);
    CHECK(ex.cost_derivative(1.1) == doctest::Approx(1.0 - std::exp(-0.2)).epsilon(1e-14));
    CHECK(ex.cost_derivative(1.1) == doctest::Approx(0.181269).epsilon(1e-5));
    for (double x : {0.6, 0.95, 1.1, 1.7}) CHECK(ex.cost(x) == doctest::Approx(exp_cost(x)).epsilon(1e-12));
}

TEST_CASE("cpmm lambda matches numeric log slope") {
    CHECK(cpmm_lambda(1, 1) == 2.0);
    CHECK(cpmm_lambda(1, 3) == doctest::Approx(4.0 / 3.0));
    CHECK(cpmm_lambda(3, 1) == 4.0);
    for (auto [a, b] : {std::pair{1.0, 1.0}, {1.0, 3.0}, {3.0, 1.0}}) {
        const auto m = MarketCurve::cpmm(a, b);
        const double h = 1e-6;
        const double numeric = -(std::log(m.phi(1 + h)) - std::log(m.phi(1 - h))) / (2 * h);
        CHECK(numeric == doctest::Approx(cpmm_lambda(a, b)).epsilon(1e-8));
        CHECK(m.log_slope(1.0) == doctest::Approx(cpmm_lambda(a, b)).epsilon(1e-14));
    }
}

TEST_CASE("normalized phi") {
    const auto cpmm = MarketCurve::cpmm(1, 1);
    CHECK(normalized_phi(cpmm, 1.0, 1.0) == 1.0);
    CHECK(normalized_phi(cpmm, 1.0, 2.0) == doctest::Approx(0.25));
    const auto ex = MarketCurve::exponential(2.0, 1.0, 5.0);
    CHECK(normalized_phi(ex, 1.0, 1.1) == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
}

TEST_CASE("linearization error constants") {
    const auto cpmm = MarketCurve::cpmm(1, 1);
    // sup over [-0.1, 0.1] of |-2 log(1 + r) + 2 r| sits at r = -0.1
    const double oracle = std::abs(-2.0 * std::log(0.9) - 0.2);
    const auto wide = linearization_error(cpmm, 1.0, 2.0, -0.1, 0.1);
    CHECK(wide.bound == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(wide.bound == doctest::Approx(0.0107).epsilon(0.05));
    const auto narrow = linearization_error(cpmm, 1.0, 2.0, -0.01, 0.01);
    CHECK(narrow.bound == doctest::Approx(std::abs(-2.0 * std::log(0.99) - 0.02)).epsilon(1e-9));
    CHECK(narrow.bound == doctest::Approx(1.01e-4).epsilon(0.01));
    const auto ex = linearization_error(MarketCurve::exponential(2.0), 1.0, 2.0, -0.3, 0.3);
    CHECK(ex.bound < 1e-14);
}

TEST_CASE("calculus properties hold on every kind") {
    for (const auto& m : all_kinds()) {
        const CostContext c(m, 1.0);
        const CostContext c1(m, 1.3);
        std::vector<double> xs;
        for (int j = 0; j < 200; ++j) xs.push_back(0.5 + 1.5 * (j + 0.37) / 200.0);
        const bool flat = std::holds_alternative<ConstantReference>(m.kind());
        for (double x : xs) {
            const double h = 1e-5 * x;
            const double fd = (c.cost(x + h) - c.cost(x - h)) / (2 * h);
            const double d = c.cost_derivative(x);
            if (flat) {
                CHECK(std::abs(fd - d) < 1e-9);
            } else {
                CHECK(std::abs(fd - d) <= 1e-6 * std::abs(d) + 1e-9);
            }
            CHECK(c.cost(x) >= -1e-15);
            const double second = c.cost(x + h) - 2 * c.cost(x) + c.cost(x - h);
            CHECK(second >= -1e-12);
            // payout of x -> y on the venue, unwound at the anchor price
            const double y = x * 0.93 + 0.1;
            const double direct = m.action(x, y) + c.anchor_price() * (x - y);
            CHECK(c.cyclic_arbitrage_payout(x, y) == doctest::Approx(direct).epsilon(1e-9));
            CHECK(c.cyclic_arbitrage_payout(x, y) == doctest::Approx(c.cost(x) - c.cost(y)).epsilon(1e-9));
        }
        // anchor shift: difference is affine with slope phi(x0) - phi(x1)
        const double slope = m.phi(1.0) - m.phi(1.3);
        for (double x : {0.6, 1.1, 1.8}) {
            const double diff = c.cost(x) - c1.cost(x);
            const double ref = c.cost(0.8) - c1.cost(0.8);
            CHECK(diff - ref == doctest::Approx(slope * (x - 0.8)).epsilon(1e-9));
        }
    }
}

TEST_CASE("monotone and positive") {
    for (const auto& m : all_kinds()) {
        double prev = m.phi(0.2);
        for (int j = 1; j <= 100; ++j) {
            const double x = 0.2 + 2.8 * j / 100.0;
            const double p = m.phi(x);
            CHECK(p > 0.0);
            if (m.invertible()) {
                CHECK(p < prev);
            } else {
                CHECK(p <= prev);
            }
            prev = p;
        }
    }
}
