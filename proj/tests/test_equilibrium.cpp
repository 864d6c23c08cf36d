#include <doctest.h>

#include <cmath>

#include "lamination/equilibrium.hpp"
#include "lamination/errors.hpp"

using namespace lamination;

namespace {

// Monopoly, K = 1, exponential lambda = 2, r = 0.1: the first-order condition
// 1 + (phi - 1) - (phi e^-0.2 - 1) = 0 gives phi = 1 / (2 - e^-0.2).
const double kMonopolyPhi = 1.0 / (2.0 - std::exp(-0.2));
const double kMonopolyS = 1.0 - std::log(kMonopolyPhi) / 2.0;

BatchGame monopoly_game(double r) {
    return BatchGame(MarketCurve::exponential(2.0), OrderFlowModel::deterministic({r}), AllocationModel::monopoly(1, 1, 1));
}

}  // namespace

TEST_CASE("expected utility derivative") {
    const auto locally_free = BatchGame(MarketCurve::cpmm(1, 1), OrderFlowModel::iid(SizeDistribution::uniform(-0.1, 0.1), 3),
                                        AllocationModel::explicit_joint({{{1, 2, 1, 2}, 0.5}, {{2, 1, 2, 1}, 0.5}}, 2));
    CHECK(expected_utility_derivative(locally_free, 1, 1.0) == 0.0);
    CHECK(expected_utility_derivative(monopoly_game(0.0), 1, 1.0) == 0.0);
    CHECK(expected_utility_derivative(monopoly_game(0.1), 1, 1.0) == doctest::Approx(1.0 - std::exp(-0.2)).epsilon(1e-14));
}

TEST_CASE("monopoly exponential example") {
    const auto s = solve_lamination(monopoly_game(0.1), 1);
    CHECK(s.phi_bar == doctest::Approx(kMonopolyPhi).epsilon(1e-12));
    CHECK(s.s_star == doctest::Approx(kMonopolyS).epsilon(1e-12));
    CHECK(s.s_star == doctest::Approx(1.083295).epsilon(1e-6));
    CHECK(s.residual_ok);
    CHECK(s.s_star > 1.0);
    CHECK(s.phi_bar < 1.0);
    // mirror: a buy pushes the quote the other way
    const auto m = solve_lamination(monopoly_game(-0.1), 1);
    CHECK(m.s_star < 1.0);
    CHECK(m.phi_bar > 1.0);
}

TEST_CASE("passthrough for locally free allocations") {
    const auto g = BatchGame(MarketCurve::cpmm(1, 1), OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.05, 0.4), 3),
                             AllocationModel::explicit_joint({{{1, 2, 1, 2}, 0.5}, {{2, 1, 2, 1}, 0.5}}, 2));
    for (const auto& s : solve_all(g)) {
        CHECK(std::abs(s.s_star - 1.0) < 1e-9);
        CHECK(s.log_coefficient == doctest::Approx(0.0));
    }
}

TEST_CASE("zeta exact on exponential markets") {
    for (double w : {0.1, 0.4, 0.8}) {
        for (int K : {1, 3}) {
            const auto flow = OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.05, 0.6), K);
            const auto g = BatchGame(MarketCurve::exponential(2.0), flow, AllocationModel::bernoulli({w, 1 - w}, K));
            const double wc = effective_weight(w, K);
            const double M = 0.6 * std::exp(-0.2) + 0.4 * std::exp(0.1);
            const auto s = solve_lamination(g, 1);
            CHECK(s.phi_bar == doctest::Approx((1 - wc) / (1 - wc * M)).epsilon(1e-10));
        }
    }
}

TEST_CASE("zeta and effective weight") {
    CHECK(zeta(0.0, 1.3) == 1.0);
    CHECK(zeta(0.7, 1.0) == doctest::Approx(1.0));
    CHECK(zeta(0.5, 1.02) == doctest::Approx(0.5 / 0.49).epsilon(1e-15));
    CHECK(zeta(0.5, 1.02) == doctest::Approx(1.020408).epsilon(1e-6));
    CHECK_THROWS_AS(zeta(0.5, 2.0), PoleError);
    CHECK(effective_weight(1.0, 1) == 0.5);
    CHECK(effective_weight(0.0, 5) == 0.0);
    CHECK(effective_weight(0.25, 100000) == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("newton mercator series") {
    const auto one = newton_mercator(0.1, 1.01, 1);
    CHECK(one.partial_sum == doctest::Approx(0.1 * (1.01 - 1.0)).epsilon(1e-14));
    CHECK(std::abs(std::log(zeta(0.1, 1.01)) - one.partial_sum) <= one.remainder_bound);
    const auto fifty = newton_mercator(0.5, 1.02, 50);
    CHECK(std::abs(fifty.partial_sum - std::log(0.5 / 0.49)) < 1e-10);
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const double w = 0.95 * rng.uniform();
        const double M = 0.5 + rng.uniform() * std::min(1.5, 0.99 / std::max(w, 1e-9) - 0.5);
        const int n = 1 + static_cast<int>(rng.index(30));
        const auto s = newton_mercator(w, M, n);
        CHECK(std::abs(std::log(zeta(w, M)) - s.partial_sum) <= s.remainder_bound * (1 + 1e-12) + 1e-15);
    }
    CHECK_THROWS_AS(newton_mercator(0.6, 2.0, 3), PoleError);
}

TEST_CASE("zeta certificate constants on the cpmm") {
    for (auto [lo, hi, expect] : {std::tuple{-0.1, 0.1, 0.0107}, std::tuple{-0.01, 0.01, 1.01e-4}}) {
        const auto g = BatchGame(MarketCurve::cpmm(1, 1), OrderFlowModel::iid(SizeDistribution::uniform(lo, hi), 2),
                                 AllocationModel::bernoulli({0.3, 0.7}, 2));
        const auto cert = zeta_error_bound(g, 1);
        CHECK(cert.bound == doctest::Approx(expect).epsilon(0.05));
        CHECK(std::abs(cert.solution.log_coefficient - std::log(cert.zeta)) < cert.bound);
    }
    const auto ex = BatchGame(MarketCurve::exponential(2.0), OrderFlowModel::iid(SizeDistribution::uniform(-0.1, 0.1), 2),
                              AllocationModel::bernoulli({0.3, 0.7}, 2));
    const auto cert = zeta_error_bound(ex, 1);
    CHECK(cert.bound < 1e-14);
    CHECK(std::abs(cert.solution.log_coefficient - std::log(cert.zeta)) < 1e-12);
}

TEST_CASE("convergence as the flow shrinks") {
    double prev = 1.0;
    for (double scale : {1.0, 0.1, 0.01, 0.001}) {
        const auto g = BatchGame(MarketCurve::cpmm(1, 1),
                                 OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.04, 0.5), 2).scaled(scale),
                                 AllocationModel::bernoulli({0.6, 0.4}, 2));
        const double c = std::abs(solve_lamination(g, 1).log_coefficient);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("dominance: derivative ignores opponents and the x0 law") {
    const auto flow = OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.05, 0.5), 2);
    const auto alloc = AllocationModel::bernoulli({0.5, 0.5}, 2);
    const auto a = BatchGame(MarketCurve::cpmm(1, 1), flow, alloc);
    const auto b = BatchGame(MarketCurve::cpmm(1, 1), flow, alloc, 1.0, SizeDistribution::two_point(1.05, 0.95, 0.3),
                             default_action_space(1.0));
    CHECK(solve_lamination(a, 1).s_star == solve_lamination(b, 1).s_star);
}

TEST_CASE("solver errors") {
    const auto pole = BatchGame(MarketCurve::exponential(2.0), OrderFlowModel::deterministic({-0.4}),
                                AllocationModel::monopoly(1, 1, 1));
    CHECK_THROWS_AS(solve_lamination(pole, 1), NoBracket);
    CHECK_THROWS_AS(zeta_error_bound(pole, 1), PoleError);
    const auto blindless = BatchGame(MarketCurve::cpmm(1, 1), OrderFlowModel::deterministic({0.1}),
                                     AllocationModel::explicit_joint({{{1, 1}, 1.0}}, 1, false));
    CHECK_THROWS_AS(solve_lamination(blindless, 1), UnsupportedError);
    const auto absent = BatchGame(MarketCurve::cpmm(1, 1), OrderFlowModel::deterministic({0.1}),
                                  AllocationModel::monopoly(1, 2, 1));
    CHECK_THROWS_AS(solve_lamination(absent, 2), PreconditionError);
}

TEST_CASE("general oracle depth") {
    // scaling depth by 2 on an exponential market with lambda/2 is the same game
    const auto base = solve_lamination(monopoly_game(0.1), 1);
    const auto scaled = BatchGame(MarketCurve::exponential(1.0, 2.0, 3.0), OrderFlowModel::deterministic({0.2}),
                                  AllocationModel::monopoly(1, 1, 1), 2.0);
    const auto s = solve_lamination(scaled, 1);
    CHECK(s.s_star == doctest::Approx(2.0 * base.s_star).epsilon(1e-11));
    CHECK(s.phi_bar == doctest::Approx(base.phi_bar).epsilon(1e-11));
}

TEST_CASE("closed form agrees with root on exponential markets") {
    const auto g = BatchGame(MarketCurve::exponential(2.0), OrderFlowModel::iid(SizeDistribution::uniform(-0.1, 0.1), 4),
                             AllocationModel::bernoulli({0.7, 0.3}, 4));
    const auto cf = zeta_closed_form(g, 1);
    CHECK(cf.method == SolveMethod::ZetaClosedForm);
    CHECK(cf.s_star == doctest::Approx(solve_lamination(g, 1).s_star).epsilon(1e-12));
}
