#include "lamination/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <variant>

#include "lamination/errors.hpp"

namespace lamination {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// order[p-1] = label at position p.
std::vector<int> positions_to_labels(const std::vector<int>& idx) {
    std::vector<int> order(idx.size());
    for (std::size_t h = 0; h < idx.size(); ++h) order[static_cast<std::size_t>(idx[h] - 1)] = static_cast<int>(h) + 1;
    return order;
}

std::vector<std::vector<int>> all_orders(int K) {
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 1);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

bool alloc_exchangeable(const AllocationModel& a) {
    return std::visit(overloaded{[](const Monopoly&) { return true; },
                                 [](const IndependentBernoulli&) { return true; },
                                 [](const PermutedDeterministic&) { return true; },
                                 [&a](const ExplicitJoint&) { return a.K() <= 1; },
                                 [&a](const ReservedTop&) { return a.K() <= 1; }},
                      a.kind());
}

std::vector<double> reorder(const std::vector<double>& by_label, const std::vector<int>& order) {
    std::vector<double> out(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) out[p] = by_label[static_cast<std::size_t>(order[p] - 1)];
    return out;
}

OrderFlowModel positional_flow(const LabelledGame& lg) {
    const auto& f = lg.flow;
    if (lg.idx_law == IndexLaw::Known) {
        const auto order = positions_to_labels(lg.known_idx);
        return std::visit(overloaded{[&](const DeterministicFlow& d) { return OrderFlowModel::deterministic(reorder(d.r, order)); },
                                     [&](const IidFlow&) { return f; },
                                     [&](const PermutedFlow&) { return f; },
                                     [&](const EmpiricalFlow& e) {
                                         std::vector<std::vector<double>> samples;
                                         for (const auto& s : e.samples) samples.push_back(reorder(s, order));
                                         return OrderFlowModel::empirical(std::move(samples));
                                     }},
                          f.kind());
    }
    return std::visit(overloaded{[&](const DeterministicFlow& d) { return OrderFlowModel::permuted(d.r); },
                                 [&](const IidFlow&) { return f; },
                                 [&](const PermutedFlow&) { return f; },
                                 [&](const EmpiricalFlow& e) {
                                     const auto orders = all_orders(f.K());
                                     if (e.samples.size() * orders.size() > kDefaultEnumerationLimit) {
                                         throw UnsupportedError("empirical flow too large to symmetrize");
                                     }
                                     std::vector<std::vector<double>> samples;
                                     for (const auto& s : e.samples) {
                                         for (const auto& o : orders) samples.push_back(reorder(s, o));
                                     }
                                     return OrderFlowModel::empirical(std::move(samples));
                                 }},
                      f.kind());
}

AllocationModel positional_alloc(const LabelledGame& lg) {
    const auto& a = lg.alloc;
    if (std::holds_alternative<IndependentBernoulli>(a.kind()) || std::holds_alternative<Monopoly>(a.kind())) return a;
    std::vector<std::vector<int>> orders;
    if (lg.idx_law == IndexLaw::Known) {
        orders.push_back(positions_to_labels(lg.known_idx));
    } else {
        orders = all_orders(lg.K());
    }
    std::map<std::vector<int>, double> merged;
    const double p_order = 1.0 / static_cast<double>(orders.size());
    for (const auto& outcome : a.outcomes()) {
        for (const auto& order : orders) {
            std::vector<int> map(outcome.map.size());
            map[0] = outcome.map[0];
            for (std::size_t p = 0; p < order.size(); ++p) map[p + 1] = outcome.map[static_cast<std::size_t>(order[p])];
            merged[map] += outcome.prob * p_order;
        }
    }
    std::vector<AllocationOutcome> joint;
    for (const auto& [map, p] : merged) joint.push_back({map, p});
    return AllocationModel::explicit_joint(std::move(joint), a.N());
}

}  // namespace

bool flow_exchangeable(const OrderFlowModel& f) {
    return std::holds_alternative<IidFlow>(f.kind()) || std::holds_alternative<PermutedFlow>(f.kind()) ||
           f.K() == 1;
}

void LabelledGame::validate() const {
    if (flow.K() != alloc.K()) {
        throw ConfigError("flow and allocation disagree on K",
                          {{"flow_K", std::to_string(flow.K())}, {"alloc_K", std::to_string(alloc.K())}});
    }
    if (idx_law == IndexLaw::Known) {
        auto sorted = known_idx;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expected(static_cast<std::size_t>(K()));
        std::iota(expected.begin(), expected.end(), 1);
        if (sorted != expected) throw ConfigError("known idx must be a permutation of 1..K");
    }
    if (!action_space.contains(x_oracle)) throw ConfigError("oracle depth outside the action space");
    if (!market.contains(action_space.lo) || !market.contains(action_space.hi)) {
        throw ConfigError("action space leaves the market domain");
    }
}

LabelledGame make_labelled_game(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle,
                                IndexLaw idx_law, std::vector<int> known_idx) {
    LabelledGame lg{std::move(market), std::move(flow), std::move(alloc), x_oracle,
                    SizeDistribution::point_mass(x_oracle), default_action_space(x_oracle), idx_law,
                    std::move(known_idx)};
    lg.validate();
    return lg;
}

LabelledDraw sample_labelled_draw(const LabelledGame& lg, Rng& rng) {
    LabelledDraw d;
    d.x0 = lg.x0.sample(rng);
    d.r = lg.flow.sample(rng);
    const auto full = lg.alloc.sample(rng);
    d.alpha.assign(full.begin() + 1, full.end());
    if (lg.idx_law == IndexLaw::Known) {
        d.idx = lg.known_idx;
    } else {
        d.idx.resize(static_cast<std::size_t>(lg.K()));
        std::iota(d.idx.begin(), d.idx.end(), 1);
        rng.shuffle(std::span<int>(d.idx));
    }
    return d;
}

PriceTable diagonal_prices(const std::vector<double>& per_player, int K) {
    PriceTable t;
    for (double s : per_player) t.emplace_back(static_cast<std::size_t>(K), s);
    return t;
}

double labelled_utility(const LabelledGame& lg, int player, const PriceTable& prices, const LabelledDraw& draw) {
    const CostContext cost(lg.market, lg.x_oracle);
    const auto order = positions_to_labels(draw.idx);
    double depth = draw.x0;
    double u = 0.0;
    for (int label : order) {
        const auto h = static_cast<std::size_t>(label - 1);
        depth += draw.r[h];
        lg.market.require_in_domain(depth, "post-trade depth");
        const int holder = draw.alpha[h];
        const double target = prices[static_cast<std::size_t>(holder - 1)][h];
        if (holder == player) u += cost.cost(depth) - cost.cost(target);
        depth = target;
    }
    return u;
}

BatchGame uniform_game(const LabelledGame& lg) {
    lg.validate();
    if (lg.idx_law == IndexLaw::Uniform && !flow_exchangeable(lg.flow) && !alloc_exchangeable(lg.alloc)) {
        throw UnsupportedError("positional allocation would depend on the order flow");
    }
    const auto alloc = AllocationModel::reserved_top(positional_alloc(lg), lg.N() + 1);
    return BatchGame(lg.market, positional_flow(lg), alloc, lg.x_oracle, lg.x0, lg.action_space);
}

BatchOutcome to_uniform_outcome(const LabelledGame& lg, const LabelledDraw& draw) {
    const auto order = positions_to_labels(draw.idx);
    BatchOutcome o;
    o.x0 = draw.x0;
    o.orders = reorder(draw.r, order);
    o.alloc.push_back(lg.N() + 1);
    for (int label : order) o.alloc.push_back(draw.alpha[static_cast<std::size_t>(label - 1)]);
    return o;
}

LabelledBestResponse labelled_best_response(const LabelledGame& lg, int player, const std::vector<double>& grid,
                                            std::size_t n_replicas, std::uint64_t seed, int max_sweeps) {
    lg.validate();
    if (grid.empty()) throw PreconditionError("empty grid");
    const int K = lg.K();
    const auto nK = static_cast<std::size_t>(K);

    // Only two pieces of a draw touch s_{i,h}: the arbitrage on label h itself
    // (-C(s_{i,h}) when i holds h) and the sandwich on its successor position
    // (C(s_{i,h} + r) when i holds both). Everything else is constant in s_{i,h}.
    std::vector<double> own(nK, 0.0);
    std::vector<std::map<double, double>> sandwich(nK);
    auto accumulate = [&](const std::vector<double>& r, const std::vector<int>& alpha, const std::vector<int>& idx,
                          double p) {
        const auto order = positions_to_labels(idx);
        for (std::size_t h = 0; h < nK; ++h) {
            if (alpha[h] != player) continue;
            own[h] += p;
            const int pos = idx[h];
            if (pos < K) {
                const auto next = static_cast<std::size_t>(order[static_cast<std::size_t>(pos)] - 1);
                if (alpha[next] == player) sandwich[h][r[next]] += p;
            }
        }
    };

    LabelledBestResponse out;
    const std::size_t flow_n = lg.flow.outcome_count();
    const std::size_t alloc_n = lg.alloc.outcome_count();
    std::size_t idx_n = 1;
    if (lg.idx_law == IndexLaw::Uniform) {
        for (int k = 2; k <= K; ++k) idx_n *= static_cast<std::size_t>(k);
    }
    const bool exact = flow_n > 0 && alloc_n > 0 &&
                       static_cast<double>(flow_n) * static_cast<double>(alloc_n) * static_cast<double>(idx_n) <=
                           static_cast<double>(kDefaultEnumerationLimit);
    if (exact) {
        out.method = "exact";
        std::vector<std::vector<int>> idxs;
        if (lg.idx_law == IndexLaw::Known) {
            idxs.push_back(lg.known_idx);
        } else {
            for (const auto& order : all_orders(K)) {
                std::vector<int> idx(nK);
                for (std::size_t p = 0; p < nK; ++p) idx[static_cast<std::size_t>(order[p] - 1)] = static_cast<int>(p) + 1;
                idxs.push_back(idx);
            }
        }
        const double p_idx = 1.0 / static_cast<double>(idxs.size());
        const auto flows = lg.flow.outcomes();
        for (const auto& a : lg.alloc.outcomes()) {
            const std::vector<int> alpha(a.map.begin() + 1, a.map.end());
            for (const auto& f : flows) {
                for (const auto& idx : idxs) accumulate(f.r, alpha, idx, a.prob * f.prob * p_idx);
            }
        }
    } else {
        out.method = "monte-carlo";
        if (n_replicas == 0) throw PreconditionError("Monte Carlo best response needs replicas");
        const double p = 1.0 / static_cast<double>(n_replicas);
        for (std::size_t rep = 0; rep < n_replicas; ++rep) {
            auto rng = Rng::for_replica(seed, rep);
            const auto d = sample_labelled_draw(lg, rng);
            accumulate(d.r, d.alpha, d.idx, p);
        }
    }

    const CostContext cost(lg.market, lg.x_oracle);
    out.coordinates.assign(nK, lg.x_oracle);
    out.held.assign(nK, false);
    for (std::size_t h = 0; h < nK; ++h) out.held[h] = own[h] > 0.0;

    for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
        bool changed = false;
        for (std::size_t h = 0; h < nK; ++h) {
            if (!out.held[h]) continue;
            double best = -std::numeric_limits<double>::infinity();
            double arg = out.coordinates[h];
            for (double g : grid) {
                double v = -own[h] * cost.cost(g);
                for (const auto& [r, w] : sandwich[h]) {
                    lg.market.require_in_domain(g + r, "sandwich depth");
                    v += w * cost.cost(g + r);
                }
                if (v > best) {
                    best = v;
                    arg = g;
                }
            }
            if (arg != out.coordinates[h]) {
                out.coordinates[h] = arg;
                changed = true;
            }
        }
        if (!changed) break;
    }
    out.sweeps = std::min(out.sweeps, max_sweeps);
    return out;
}

DiagonalCollapse diagonal_collapse_check(const LabelledGame& lg, int player, const std::vector<double>& grid,
                                         std::size_t n_replicas, std::uint64_t seed, const SolverOptions& options) {
    if (grid.size() < 2) throw PreconditionError("grid needs at least two points");
    DiagonalCollapse out;
    out.uniform_s_star = solve_lamination(uniform_game(lg), player, options).s_star;
    out.pitch = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < grid.size(); ++j) out.pitch = std::min(out.pitch, std::abs(grid[j] - grid[j - 1]));
    out.response = labelled_best_response(lg, player, grid, n_replicas, seed);
    bool any = false;
    for (std::size_t h = 0; h < out.response.coordinates.size(); ++h) {
        if (!out.response.held[h]) continue;
        any = true;
        out.max_deviation = std::max(out.max_deviation, std::abs(out.response.coordinates[h] - out.uniform_s_star));
    }
    out.pass = any && out.max_deviation <= out.pitch * (1.0 + 1e-9);
    return out;
}

std::string to_string(FillMode mode) { return mode == FillMode::PartialFill ? "partial" : "aon"; }

double limit_fill_depth(const LimitSandwich& ls, double s) {
    const double full = s + ls.r;
    if (ls.mode == FillMode::AllOrNothing) {
        const bool fills = ls.r >= 0.0 ? full <= ls.q : full >= ls.q;
        return fills ? full : s;
    }
    // Partial fills stop at the limit depth, and never trade backwards.
    return ls.r >= 0.0 ? std::min(full, std::max(s, ls.q)) : std::max(full, std::min(s, ls.q));
}

double limit_sandwich_payoff(const LimitSandwich& ls, double s) {
    const auto& c = ls.cost;
    return c.cost(ls.x0) - c.cost(s) + c.cost(limit_fill_depth(ls, s)) - c.cost(s);
}

PhaseTransition detect_phase_transition(const LimitSandwich& ls, const std::vector<double>& scan, double offset) {
    PhaseTransition out;
    out.boundary = ls.q - ls.r;
    const double filled_side = ls.r >= 0.0 ? out.boundary - offset : out.boundary + offset;
    const double unfilled_side = ls.r >= 0.0 ? out.boundary + offset : out.boundary - offset;
    out.filled_limit = limit_sandwich_payoff(ls, filled_side);
    out.unfilled_limit = limit_sandwich_payoff(ls, unfilled_side);
    out.jump = out.filled_limit - out.unfilled_limit;

    const double x_oracle = ls.cost.anchor();
    out.passthrough_payoff = limit_sandwich_payoff(ls, x_oracle);
    out.scan_max = -std::numeric_limits<double>::infinity();
    double best_below = -std::numeric_limits<double>::infinity();
    for (double s : scan) {
        const double u = limit_sandwich_payoff(ls, s);
        if (u > out.scan_max) {
            out.scan_max = u;
            out.scan_argmax = s;
        }
        if (s < x_oracle && u > best_below) {
            best_below = u;
            out.best_below_oracle = s;
        }
    }
    out.better_than_passthrough = best_below > out.passthrough_payoff;
    return out;
}

}  // namespace lamination
