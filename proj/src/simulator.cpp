#include "lamination/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lamination/errors.hpp"
#include "parallel.hpp"

namespace lamination {

namespace {

void check_strategies(const BatchGame& g, const std::vector<double>& strategies) {
    if (strategies.size() != static_cast<std::size_t>(g.N())) {
        throw PreconditionError("strategy profile needs one depth per player",
                                {{"expected", std::to_string(g.N())}, {"got", std::to_string(strategies.size())}});
    }
}

double depth_checked(const BatchGame& g, double x, const char* what) {
    g.market().require_in_domain(x, what);
    return x;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<std::size_t>::max() / b) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

}  // namespace

BatchOutcome sample_outcome(const BatchGame& g, Rng& rng) {
    BatchOutcome o;
    o.x0 = g.initial_depth().sample(rng);
    o.orders = g.flow().sample(rng);
    o.alloc = g.allocation().sample(rng);
    return o;
}

BatchTrace execute_batch(const BatchGame& g, const std::vector<double>& strategies, const BatchOutcome& outcome) {
    check_strategies(g, strategies);
    const auto& m = g.market();
    const auto& cost = g.cost();
    const int K = g.K();

    BatchTrace t;
    t.outcome = outcome;
    t.utilities.assign(static_cast<std::size_t>(g.N()), 0.0);
    t.depths.reserve(2 * K + 1);
    double depth = depth_checked(g, outcome.x0, "initial depth");

    auto arb = [&](int slot) {
        const int player = outcome.alloc[static_cast<std::size_t>(slot)];
        const double target = depth_checked(g, strategies[static_cast<std::size_t>(player - 1)], "arbitrage target");
        t.price_before.push_back(m.phi(depth));
        t.utilities[static_cast<std::size_t>(player - 1)] += cost.cost(depth) - cost.cost(target);
        depth = target;
        t.price_after.push_back(m.phi(depth));
        t.depths.push_back(depth);
    };

    arb(0);
    for (int k = 1; k <= K; ++k) {
        const double next = depth_checked(g, depth + outcome.orders[static_cast<std::size_t>(k - 1)], "post-trade depth");
        t.price_before.push_back(m.phi(depth));
        t.order_revenue.push_back(m.action(depth, next));
        depth = next;
        t.price_after.push_back(m.phi(depth));
        t.depths.push_back(depth);
        arb(k);
    }
    return t;
}

BatchTrace run_batch(const BatchGame& g, const std::vector<double>& strategies, Rng& rng) {
    return execute_batch(g, strategies, sample_outcome(g, rng));
}

double realized_utility(const BatchGame& g, int player, const std::vector<double>& strategies,
                        const BatchOutcome& outcome) {
    const auto& cost = g.cost();
    double depth = depth_checked(g, outcome.x0, "initial depth");
    double u = 0.0;
    const int K = g.K();
    for (int k = 0; k <= K; ++k) {
        if (k > 0) depth = depth_checked(g, depth + outcome.orders[static_cast<std::size_t>(k - 1)], "post-trade depth");
        const int holder = outcome.alloc[static_cast<std::size_t>(k)];
        const double target = strategies[static_cast<std::size_t>(holder - 1)];
        if (holder == player) u += cost.cost(depth) - cost.cost(depth_checked(g, target, "arbitrage target"));
        depth = target;
    }
    return u;
}

std::vector<double> strategy_profile(const BatchGame& g, const std::vector<EquilibriumSolution>& solutions) {
    std::vector<double> s(static_cast<std::size_t>(g.N()), g.x_oracle());
    for (const auto& sol : solutions) {
        if (sol.player >= 1 && sol.player <= g.N()) s[static_cast<std::size_t>(sol.player - 1)] = sol.s_star;
    }
    return s;
}

McEstimate monte_carlo_utility(const BatchGame& g, int player, const std::vector<double>& strategies,
                               std::size_t n_replicas, std::uint64_t seed) {
    check_strategies(g, strategies);
    if (n_replicas < 2) throw PreconditionError("need at least two replicas", {{"n", std::to_string(n_replicas)}});
    const std::size_t chunks = (n_replicas + kReplicaChunk - 1) / kReplicaChunk;
    std::vector<detail::Moments> parts(chunks);
    detail::parallel_chunks(n_replicas, kReplicaChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        detail::Moments acc;
        for (std::size_t r = begin; r < end; ++r) {
            auto rng = Rng::for_replica(seed, r);
            try {
                acc.add(realized_utility(g, player, strategies, sample_outcome(g, rng)));
            } catch (Error& e) {
                e.context()["replica"] = std::to_string(r);
                throw;
            }
        }
        parts[c] = acc;
    });
    detail::Moments total;
    for (const auto& p : parts) total.merge(p);
    return {total.mean, std::sqrt(total.variance() / static_cast<double>(total.n)), total.n};
}

std::size_t outcome_count(const BatchGame& g) {
    const auto& x0 = g.initial_depth();
    if (!x0.is_discrete()) return 0;
    std::size_t total = x0.atoms().size();
    total = saturating_mul(total, g.flow().outcome_count());
    total = saturating_mul(total, g.allocation().outcome_count());
    return total;
}

bool is_enumerable(const BatchGame& g, std::size_t limit) {
    const auto n = outcome_count(g);
    return n > 0 && n <= limit;
}

void for_each_outcome(const BatchGame& g, const std::function<void(const BatchOutcome&, double)>& fn,
                      std::size_t limit) {
    if (!is_enumerable(g, limit)) {
        throw UnsupportedError("game is not exhaustively enumerable",
                               {{"outcomes", std::to_string(outcome_count(g))}, {"limit", std::to_string(limit)}});
    }
    const auto x0_atoms = g.initial_depth().atoms();
    const auto flows = g.flow().outcomes();
    const auto allocs = g.allocation().outcomes();
    BatchOutcome o;
    for (const auto& x0 : x0_atoms) {
        o.x0 = x0.value;
        for (const auto& f : flows) {
            o.orders = f.r;
            for (const auto& a : allocs) {
                o.alloc = a.map;
                const double p = x0.prob * f.prob * a.prob;
                if (p > 0.0) fn(o, p);
            }
        }
    }
}

double exact_expected_utility(const BatchGame& g, int player, const std::vector<double>& strategies) {
    check_strategies(g, strategies);
    double total = 0.0;
    for_each_outcome(g, [&](const BatchOutcome& o, double p) { total += p * realized_utility(g, player, strategies, o); });
    return total;
}

std::vector<double> make_grid(double x_oracle, double pitch, double lo, double hi) {
    if (!(pitch > 0.0) || !(lo <= hi)) {
        throw PreconditionError("grid needs positive pitch and lo <= hi",
                                {{"pitch", format_double(pitch)}, {"lo", format_double(lo)}, {"hi", format_double(hi)}});
    }
    const auto j_lo = static_cast<long long>(std::ceil((lo - x_oracle) / pitch - 1e-9));
    const auto j_hi = static_cast<long long>(std::floor((hi - x_oracle) / pitch + 1e-9));
    std::vector<double> grid;
    for (long long j = j_lo; j <= j_hi; ++j) {
        const double x = x_oracle + static_cast<double>(j) * pitch;
        if (x >= lo && x <= hi) grid.push_back(x);
    }
    return grid;
}

BestResponse brute_force_best_response(const BatchGame& g, int player, const std::vector<double>& opponents,
                                       const std::vector<double>& grid, std::size_t n_replicas,
                                       std::uint64_t seed) {
    check_strategies(g, opponents);
    if (grid.empty()) throw PreconditionError("empty grid");
    for (double x : grid) {
        if (!g.action_space().contains(x)) {
            throw PreconditionError("grid point outside the action space", {{"x", format_double(x)}});
        }
    }
    BestResponse out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);

    if (is_enumerable(g)) {
        out.method = "exact";
        auto profile = opponents;
        for_each_outcome(g, [&](const BatchOutcome& o, double p) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                profile[static_cast<std::size_t>(player - 1)] = grid[j];
                out.values[j] += p * realized_utility(g, player, profile, o);
            }
        });
    } else {
        out.method = "monte-carlo";
        if (n_replicas == 0) throw PreconditionError("Monte Carlo best response needs replicas");
        const std::size_t chunks = (n_replicas + kReplicaChunk - 1) / kReplicaChunk;
        std::vector<std::vector<double>> parts(chunks, std::vector<double>(grid.size(), 0.0));
        detail::parallel_chunks(n_replicas, kReplicaChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
            auto profile = opponents;
            auto& sums = parts[c];
            for (std::size_t r = begin; r < end; ++r) {
                auto rng = Rng::for_replica(seed, r);
                const auto o = sample_outcome(g, rng);
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    profile[static_cast<std::size_t>(player - 1)] = grid[j];
                    sums[j] += realized_utility(g, player, profile, o);
                }
            }
        });
        for (const auto& part : parts) {
            for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] += part[j];
        }
        for (auto& v : out.values) v /= static_cast<double>(n_replicas);
    }
    const auto best = std::max_element(out.values.begin(), out.values.end());
    out.argmax = grid[static_cast<std::size_t>(best - out.values.begin())];
    out.value = *best;
    return out;
}

TraderExperience trader_experience(const BatchGame& g, const std::vector<double>& strategies,
                                   std::size_t n_replicas, std::uint64_t seed, bool exclude_first_slot, int bins) {
    check_strategies(g, strategies);
    if (!g.allocation().blind()) throw UnsupportedError("trader experience needs a blind allocation");
    if (n_replicas == 0) throw PreconditionError("need at least one replica");
    const int K = g.K();
    const int first = (exclude_first_slot && K > 1) ? 2 : 1;
    const auto span = static_cast<std::size_t>(K - first + 1);

    std::vector<double> samples(n_replicas);
    detail::parallel_chunks(n_replicas, kReplicaChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            auto rng = Rng::for_replica(seed, r);
            const auto alloc = g.allocation().sample(rng);
            const int k = first + static_cast<int>(rng.index(span));
            const int pricer = alloc[static_cast<std::size_t>(k - 1)];
            samples[r] = normalized_phi(g.market(), g.x_oracle(), strategies[static_cast<std::size_t>(pricer - 1)]);
        }
    });

    TraderExperience out;
    out.n = n_replicas;
    detail::Moments mom, log_mom;
    for (double p : samples) {
        mom.add(p);
        log_mom.add(std::log(p));
    }
    out.mean = mom.mean;
    out.std_dev = std::sqrt(mom.variance());
    out.mean_log = log_mom.mean;

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    out.quantile_levels = {0.05, 0.25, 0.5, 0.75, 0.95};
    for (double q : out.quantile_levels) {
        // Linear interpolation between order statistics.
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        out.quantiles.push_back(sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    }

    double lo = sorted.front(), hi = sorted.back();
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
        lo -= 0.5e-6;
        hi += 0.5e-6;
    }
    const int nb = std::max(bins, 1);
    out.histogram.edges.resize(static_cast<std::size_t>(nb) + 1);
    for (int b = 0; b <= nb; ++b) out.histogram.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / nb;
    out.histogram.counts.assign(static_cast<std::size_t>(nb), 0);
    for (double p : sorted) {
        auto b = static_cast<int>((p - lo) / (hi - lo) * nb);
        b = std::clamp(b, 0, nb - 1);
        ++out.histogram.counts[static_cast<std::size_t>(b)];
    }
    return out;
}

}  // namespace lamination
