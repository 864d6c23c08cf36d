#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "lamination/equilibrium.hpp"
#include "lamination/errors.hpp"
#include "lamination/extensions.hpp"
#include "lamination/simulator.hpp"

using namespace lamination;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Random map over slots 0..K with no player on two consecutive slots.
std::vector<int> alternating_map(Rng& rng, int N, int K) {
    std::vector<int> map{1 + static_cast<int>(rng.index(static_cast<std::size_t>(N)))};
    for (int k = 1; k <= K; ++k) {
        int p;
        do {
            p = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(N)));
        } while (p == map.back());
        map.push_back(p);
    }
    return map;
}

SizeDistribution random_size_law(Rng& rng, double R) {
    const double a = -R * (0.2 + 0.8 * rng.uniform());
    const double b = R * (0.2 + 0.8 * rng.uniform());
    switch (rng.index(4)) {
        case 0:
            return SizeDistribution::uniform(a, b);
        case 1:
            return SizeDistribution::two_point(b, a, 0.1 + 0.8 * rng.uniform());
        case 2:
            return SizeDistribution::truncated_normal(0.3 * (a + b), 0.5 * (b - a), a, b);
        default:
            return SizeDistribution::discrete({a, 0.5 * (a + b), b}, {0.3, 0.3, 0.4});
    }
}

// ---- criteria ------------------------------------------------------------

Verdict linearization_constants() {
    const auto m = MarketCurve::cpmm(1, 1);
    const double wide = linearization_error(m, 1.0, 2.0, -0.1, 0.1).bound;
    const double narrow = linearization_error(m, 1.0, 2.0, -0.01, 0.01).bound;
    Verdict v;
    v.pass = std::abs(wide - 0.0107) <= 0.0005 && std::abs(narrow - 1.01e-4) <= 1e-5;
    v.detail = fmt("C = %.6f on [-0.1, 0.1], %.4e on [-0.01, 0.01]", wide, narrow);
    return v;
}

Verdict passthrough() {
    Rng rng(101);
    double worst = 0.0;
    int solved = 0;
    for (int t = 0; t < 20; ++t) {
        const int N = 2 + static_cast<int>(rng.index(2));
        const int K = 1 + static_cast<int>(rng.index(4));
        const double x = 0.5 + 1.5 * rng.uniform();
        std::vector<AllocationOutcome> maps;
        const int n_maps = 1 + static_cast<int>(rng.index(4));
        for (int j = 0; j < n_maps; ++j) maps.push_back({alternating_map(rng, N, K), 0.0});
        double total = 0.0;
        for (auto& m : maps) total += (m.prob = 0.2 + rng.uniform());
        for (auto& m : maps) m.prob /= total;
        const auto alloc = AllocationModel::explicit_joint(maps, N);
        const auto market = t % 2 == 0 ? MarketCurve::cpmm(1.0 + rng.uniform(), 1.0 + rng.uniform())
                                       : MarketCurve::exponential(0.5 + 3 * rng.uniform(), x, 1.0 + rng.uniform());
        const auto flow = OrderFlowModel::iid(random_size_law(rng, 0.1 * x), K);
        const BatchGame g(market, flow, alloc, x);
        for (const auto& s : solve_all(g)) {
            worst = std::max(worst, std::abs(s.s_star - x) / x);
            ++solved;
        }
    }
    return {worst < 1e-9, fmt("20 games, %.0f player solves, max |s* - x|/x = %.1e", solved, worst)};
}

Verdict zeta_exponential() {
    double worst = 0.0;
    int cases = 0;
    for (double lambda : {2.0, 0.7}) {
        const auto market = MarketCurve::exponential(lambda);
        for (double w : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
            for (int K : {1, 2, 4, 8}) {
                std::vector<OrderFlowModel> flows = {
                    OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.1, 0.5), K),
                    OrderFlowModel::iid(SizeDistribution::two_point(0.2, -0.05, 0.3), K),
                    OrderFlowModel::iid(SizeDistribution::uniform(-0.1, 0.1), K),
                    OrderFlowModel::iid(SizeDistribution::truncated_normal(0.02, 0.05, -0.15, 0.15), K),
                    OrderFlowModel::iid(SizeDistribution::point_mass(-0.1), K)};
                for (const auto& flow : flows) {
                    const double wc = effective_weight(w, K);
                    const double M = flow.marginal(1).mgf(lambda);
                    if (wc * M >= 0.95) continue;
                    // wide A: phi_bar reaches ~3.3 and s* drops well below x/2
                    const BatchGame g(market, flow, AllocationModel::bernoulli({w, 1.0 - w}, K), 1.0,
                                      SizeDistribution::point_mass(1.0), ActionSpace{0.2, 4.0});
                    const auto s = solve_lamination(g, 1);
                    worst = std::max(worst, std::abs(s.phi_bar - zeta(wc, M)));
                    ++cases;
                }
            }
        }
    }
    return {cases > 0 && worst < 1e-10, fmt("%.0f cases, max |phi_bar(s*) - Z| = %.1e", cases, worst)};
}

Verdict zeta_cpmm_certificate() {
    Rng rng(404);
    int ok = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto market = MarketCurve::cpmm(0.5 + 2.5 * rng.uniform(), 0.5 + 2.5 * rng.uniform());
        const int K = 1 + static_cast<int>(rng.index(6));
        const auto law = random_size_law(rng, 0.1);
        const double lambda = market.log_slope(1.0);
        const double M = law.mgf(lambda);
        // weight drawn in the regime w_check * M <= 1/2
        const double w_max = std::min(1.0, 0.5 / M * (K + 1) / K);
        const double w = w_max * (0.05 + 0.95 * rng.uniform());
        const BatchGame g(market, OrderFlowModel::iid(law, K), AllocationModel::bernoulli({w, 1.0 - w}, K));
        const auto cert = zeta_error_bound(g, 1);
        const double err = std::abs(cert.solution.log_coefficient - std::log(cert.zeta));
        if (err < cert.bound) ++ok;
        if (cert.bound > 0) worst_ratio = std::max(worst_ratio, err / cert.bound);
    }
    return {ok == 100, fmt("%.0f/100 certified, max error/bound = %.3f", ok, worst_ratio)};
}

std::vector<BatchGame> enumerable_games() {
    const auto two = [](double up, double down, double p) { return SizeDistribution::two_point(up, down, p); };
    const auto cpmm = MarketCurve::cpmm(1, 1);
    const auto ex = MarketCurve::exponential(2.0);
    return {
        BatchGame(ex, OrderFlowModel::iid(two(0.1, -0.1, 0.5), 1), AllocationModel::monopoly(1, 1, 1)),
        BatchGame(cpmm, OrderFlowModel::iid(two(0.1, -0.05, 0.6), 2), AllocationModel::monopoly(1, 1, 2)),
        BatchGame(cpmm, OrderFlowModel::iid(two(0.1, -0.1, 0.5), 2), AllocationModel::bernoulli({0.5, 0.5}, 2)),
        BatchGame(ex, OrderFlowModel::iid(two(0.08, -0.04, 0.3), 3), AllocationModel::bernoulli({0.6, 0.4}, 3)),
        BatchGame(cpmm, OrderFlowModel::iid(two(0.05, -0.1, 0.5), 3), AllocationModel::bernoulli({0.2, 0.3, 0.5}, 3)),
        BatchGame(MarketCurve::cpmm(1, 3), OrderFlowModel::iid(two(0.1, -0.02, 0.5), 2),
                  AllocationModel::bernoulli({0.7, 0.2, 0.1}, 2)),
        BatchGame(ex, OrderFlowModel::permuted({0.1, -0.05, 0.03}), AllocationModel::permuted({1, 1, 2, 2}, 2)),
        BatchGame(cpmm, OrderFlowModel::iid(two(0.1, -0.1, 0.4), 2), AllocationModel::permuted({1, 1, 2}, 2)),
        BatchGame(cpmm, OrderFlowModel::iid(two(0.06, -0.06, 0.5), 3),
                  AllocationModel::explicit_joint({{{1, 1, 2, 3}, 0.4}, {{2, 1, 1, 3}, 0.3}, {{3, 3, 2, 1}, 0.3}}, 3)),
        BatchGame(MarketCurve::exponential(1.2), OrderFlowModel::iid(two(0.15, -0.1, 0.5), 2),
                  AllocationModel::bernoulli({0.4, 0.6}, 2), 1.0, two(1.05, 0.97, 0.5), default_action_space(1.0)),
        BatchGame(cpmm, OrderFlowModel::deterministic({0.1, -0.05, 0.08}), AllocationModel::bernoulli({0.5, 0.5}, 3)),
    };
}

Verdict oracle_equivalence() {
    const auto games = enumerable_games();
    const double pitch = 1e-3;
    int players = 0, agree = 0, invariant = 0;
    double worst = 0.0;
    for (const auto& g : games) {
        const auto grid = make_grid(1.0, pitch, 0.75, 1.25);
        const auto sols = solve_all(g);
        const auto profile = strategy_profile(g, sols);
        for (const auto& s : sols) {
            ++players;
            const auto br = brute_force_best_response(g, s.player, profile, grid, 0, 0);
            const double gap = std::abs(br.argmax - s.s_star);
            worst = std::max(worst, gap);
            if (br.method == "exact" && gap <= pitch * (1 + 1e-9)) ++agree;
            bool same = true;
            for (double f : {0.9, 1.1}) {
                auto opp = profile;
                for (std::size_t j = 0; j < opp.size(); ++j) {
                    if (static_cast<int>(j) + 1 != s.player) opp[j] *= f;
                }
                same = same && brute_force_best_response(g, s.player, opp, grid, 0, 0).argmax == br.argmax;
            }
            if (same) ++invariant;
        }
    }
    Verdict v;
    v.pass = games.size() >= 10 && agree == players && invariant == players;
    v.detail = fmt("%.0f games, %.0f players, max |argmax - s*| = %.1e", static_cast<double>(games.size()), players, worst) +
               fmt(", dominance %.0f/%.0f", invariant, players);
    return v;
}

Verdict mc_consistency() {
    const auto games = enumerable_games();
    int checks = 0, ok = 0;
    double worst_z = 0.0;
    std::uint64_t seed = 20261016;
    for (const auto& g : games) {
        const auto profile = strategy_profile(g, solve_all(g));
        for (int i = 1; i <= g.N(); ++i) {
            const auto mc = monte_carlo_utility(g, i, profile, 1000000, seed++);
            const double exact = exact_expected_utility(g, i, profile);
            const double diff = std::abs(mc.mean - exact);
            const bool pass = mc.std_error > 0 ? diff <= 3 * mc.std_error : diff <= 1e-12;
            if (mc.std_error > 0) worst_z = std::max(worst_z, diff / mc.std_error);
            ++checks;
            ok += pass;
        }
    }
    return {ok == checks, fmt("%.0f/%.0f within 3 SE at n = 1e6, max |z| = %.2f", ok, checks, worst_z)};
}

Verdict limiting_behaviour() {
    const auto market = MarketCurve::cpmm(1, 1);
    std::vector<double> flow_seq;
    for (double scale : {1.0, 0.1, 0.01, 0.001}) {
        const BatchGame g(market, OrderFlowModel::iid(SizeDistribution::uniform(-0.05, 0.1), 3).scaled(scale),
                          AllocationModel::bernoulli({0.7, 0.3}, 3));
        flow_seq.push_back(std::abs(solve_lamination(g, 1).log_coefficient));
    }
    // coupling: mix a monopoly map (weight t) into a locally free alternation
    std::vector<double> coupling_seq;
    for (double t : {0.5, 0.1, 0.01, 0.001}) {
        const auto alloc = AllocationModel::explicit_joint(
            {{{1, 1, 1, 1}, t}, {{1, 2, 1, 2}, (1 - t) / 2}, {{2, 1, 2, 1}, (1 - t) / 2}}, 2);
        const BatchGame g(market, OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.05, 0.5), 3), alloc);
        coupling_seq.push_back(std::abs(solve_lamination(g, 1).log_coefficient));
    }
    auto decreasing = [](const std::vector<double>& s) {
        for (std::size_t j = 1; j < s.size(); ++j) {
            if (!(s[j] < s[j - 1])) return false;
        }
        return true;
    };
    Verdict v;
    v.pass = decreasing(flow_seq) && flow_seq.back() < 1e-4 && decreasing(coupling_seq) && coupling_seq.back() < 1e-4;
    v.detail = fmt("flow |log phi_bar|: %.2e -> %.2e", flow_seq.front(), flow_seq.back()) +
               fmt("; coupling: %.2e -> %.2e", coupling_seq.front(), coupling_seq.back());
    return v;
}

Verdict diagonal_collapse() {
    const auto cpmm = MarketCurve::cpmm(1, 1);
    const auto two = [](double up, double down, double p) { return SizeDistribution::two_point(up, down, p); };
    std::vector<std::pair<LabelledGame, int>> cases = {
        {make_labelled_game(cpmm, OrderFlowModel::iid(two(0.1, -0.05, 0.5), 2), AllocationModel::bernoulli({0.6, 0.4}, 2)), 1},
        {make_labelled_game(cpmm, OrderFlowModel::iid(two(0.1, -0.1, 0.5), 3), AllocationModel::bernoulli({0.5, 0.5}, 3)), 2},
        {make_labelled_game(MarketCurve::exponential(2.0), OrderFlowModel::iid(two(0.08, -0.04, 0.3), 4),
                            AllocationModel::bernoulli({0.7, 0.3}, 4)), 1},
        {make_labelled_game(cpmm, OrderFlowModel::permuted({0.1, -0.05, 0.02}), AllocationModel::bernoulli({0.4, 0.3, 0.3}, 3)), 1},
        {make_labelled_game(MarketCurve::cpmm(1, 3), OrderFlowModel::iid(SizeDistribution::discrete({-0.05, 0.0, 0.1}, {0.3, 0.3, 0.4}), 3),
                            AllocationModel::monopoly(1, 1, 3)), 1},
        {make_labelled_game(MarketCurve::exponential(1.5), OrderFlowModel::permuted({0.1, -0.05, 0.07}),
                            AllocationModel::bernoulli({0.8, 0.2}, 3)), 2},
    };
    const auto grid = make_grid(1.0, 1e-3, 0.75, 1.25);
    int passed = 0;
    double worst = 0.0;
    for (const auto& [lg, player] : cases) {
        const auto dc = diagonal_collapse_check(lg, player, grid, 0, 0);
        passed += dc.pass;
        worst = std::max(worst, dc.max_deviation);
    }
    return {passed == static_cast<int>(cases.size()) && cases.size() >= 5,
            fmt("%.0f/%.0f configurations, max coordinate deviation %.1e", passed, static_cast<double>(cases.size()), worst)};
}

Verdict limit_phase_transition() {
    const double x = 1.0, r = 0.1, eps = 0.01;
    const LimitSandwich ls{CostContext(MarketCurve::cpmm(1, 1), x), r, x + r - eps, FillMode::AllOrNothing, x};
    const auto pt = detect_phase_transition(ls, make_grid(x, 1e-4, 0.8, 1.2));
    return {pt.jump > 0 && pt.better_than_passthrough,
            fmt("jump %.6f at s = %.4f, best s below oracle %.4f", pt.jump, pt.boundary, pt.best_below_oracle) +
                fmt(" (U = %.6f vs U(x) = %.6f)", limit_sandwich_payoff(ls, pt.best_below_oracle), pt.passthrough_payoff)};
}

Verdict calculus_identities() {
    CustomCurve lorentz;
    lorentz.phi = [](double x) { return 1.0 / (1.0 + x * x); };
    CustomCurve lorentz_closed = lorentz;
    lorentz_closed.antiderivative = [](double x) { return std::atan(x); };
    const std::vector<MarketCurve> markets = {MarketCurve::cpmm(1, 1),           MarketCurve::cpmm(1, 3),
                                              MarketCurve::cpmm(3, 1),           MarketCurve::exponential(2.0),
                                              MarketCurve::exponential(0.5, 1.0, 3.0), MarketCurve::reference(1.0),
                                              MarketCurve::custom(lorentz, {0.01, 100}),
                                              MarketCurve::custom(lorentz_closed, {0.01, 100})};
    double fd_worst = 0.0, convex_worst = 0.0, affine_worst = 0.0, cyclic_worst = 0.0;
    for (const auto& m : markets) {
        const CostContext c0(m, 1.0), c1(m, 1.4);
        const bool flat = std::holds_alternative<ConstantReference>(m.kind());
        const double slope = m.phi(1.0) - m.phi(1.4);
        for (int j = 0; j < 1000; ++j) {
            const double x = 0.5 + 1.5 * (j + 0.5) / 1000.0;
            const double h = 1e-5 * x;
            const double fd = (c0.cost(x + h) - c0.cost(x - h)) / (2 * h);
            const double d = c0.cost_derivative(x);
            // the reference market has C' = 0; its check is absolute
            fd_worst = std::max(fd_worst, flat ? std::abs(fd - d) : std::abs(fd - d) / std::abs(d));
            convex_worst = std::max(convex_worst, -(c0.cost(x + h) - 2 * c0.cost(x) + c0.cost(x - h)));
            const double affine = (c0.cost(x) - c1.cost(x)) - (c0.cost(1.0) - c1.cost(1.0)) - slope * (x - 1.0);
            affine_worst = std::max(affine_worst, std::abs(affine));
            const double y = 2.0 - 0.7 * x;
            const double direct = m.action(x, y) + c0.anchor_price() * (x - y);
            cyclic_worst = std::max(cyclic_worst, std::abs(c0.cyclic_arbitrage_payout(x, y) - direct));
            cyclic_worst = std::max(cyclic_worst, std::abs(direct - (c0.cost(x) - c0.cost(y))));
        }
    }
    Verdict v;
    v.pass = fd_worst < 1e-6 && convex_worst <= 1e-12 && affine_worst < 1e-9 && cyclic_worst < 1e-9;
    v.detail = fmt("%.0f kinds x 1000 points: C' rel err %.1e, convexity slack %.1e", static_cast<double>(markets.size()),
                   fd_worst, convex_worst) +
               fmt(", affinity %.1e, cyclic %.1e", affine_worst, cyclic_worst);
    return v;
}

Verdict equal_weights() {
    const auto flow = OrderFlowModel::iid(SizeDistribution::two_point(0.1, -0.1, 0.5), 4);
    std::vector<double> seq;
    for (int N : {2, 8, 32, 128}) {
        const BatchGame g(MarketCurve::cpmm(1, 1), flow, AllocationModel::bernoulli(std::vector<double>(N, 1.0 / N), 4));
        const auto te = trader_experience(g, strategy_profile(g, solve_all(g)), 10000, 7);
        seq.push_back(std::abs(te.mean_log));
    }
    bool decreasing = true;
    for (std::size_t j = 1; j < seq.size(); ++j) decreasing = decreasing && seq[j] < seq[j - 1];
    return {decreasing && seq.back() < 0.05 * seq.front(),
            fmt("|log p_bar| at N = 2, 8, 32, 128: %.2e, %.2e, %.2e", seq[0], seq[1], seq[2]) + fmt(", %.2e", seq[3])};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "linearization constants", 1.0, linearization_constants},
        {2, "passthrough for locally free allocations", 10.0, passthrough},
        {3, "zeta exact on exponential markets", 10.0, zeta_exponential},
        {4, "zeta certificate on CPMMs", 60.0, zeta_cpmm_certificate},
        {5, "brute-force oracle equivalence", 300.0, oracle_equivalence},
        {6, "Monte Carlo consistency", 300.0, mc_consistency},
        {7, "limiting behaviour in flow and coupling", 10.0, limiting_behaviour},
        {8, "diagonal collapse", 600.0, diagonal_collapse},
        {9, "limit-order phase transition", 1.0, limit_phase_transition},
        {10, "calculus identities", 10.0, calculus_identities},
        {11, "equal-weights decentralization", 10.0, equal_weights},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("[%s] %2d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
