#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lamination/equilibrium.hpp"
#include "lamination/game.hpp"

namespace lamination {

// One joint draw of everything random in a batch. Drawn in the order
// x0, orders, allocation.
struct BatchOutcome {
    double x0 = 1.0;
    std::vector<double> orders;  // r_1..r_K
    std::vector<int> alloc;      // alpha(0..K), players 1..N
};

BatchOutcome sample_outcome(const BatchGame& g, Rng& rng);

// Executed sequence arb(0), sell(r_1), arb(1), ..., sell(r_K), arb(K).
struct BatchTrace {
    BatchOutcome outcome;
    std::vector<double> depths;        // after each of the 2K+1 orders
    std::vector<double> price_before;  // marginal price before each order
    std::vector<double> price_after;
    std::vector<double> utilities;     // per player, index i-1
    std::vector<double> order_revenue; // per liquidity order, action over its depth interval
};

// `strategies` holds one target depth per player (index i-1). Throws
// DomainError if any depth leaves the market domain.
BatchTrace execute_batch(const BatchGame& g, const std::vector<double>& strategies, const BatchOutcome& outcome);
BatchTrace run_batch(const BatchGame& g, const std::vector<double>& strategies, Rng& rng);

// Player i's utility from a fixed outcome, without building a trace.
double realized_utility(const BatchGame& g, int player, const std::vector<double>& strategies,
                        const BatchOutcome& outcome);

// Target depth per player from solver output; players without a solution
// play passthrough.
std::vector<double> strategy_profile(const BatchGame& g, const std::vector<EquilibriumSolution>& solutions);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

inline constexpr std::size_t kReplicaChunk = 8192;
inline constexpr std::size_t kDefaultEnumerationLimit = 1000000;

// Replica r draws from Rng::for_replica(seed, r). Chunks of kReplicaChunk
// replicas run in parallel and are combined in chunk order, so results do
// not depend on the thread count. A DomainError is rethrown with the
// offending replica index in its context.
McEstimate monte_carlo_utility(const BatchGame& g, int player, const std::vector<double>& strategies,
                               std::size_t n_replicas, std::uint64_t seed);

// Number of joint (x0, r, alpha) outcomes, or 0 if any component is continuous.
std::size_t outcome_count(const BatchGame& g);
bool is_enumerable(const BatchGame& g, std::size_t limit = kDefaultEnumerationLimit);
// Calls fn on every joint outcome with its probability. Throws UnsupportedError
// when the game is not enumerable within `limit`.
void for_each_outcome(const BatchGame& g, const std::function<void(const BatchOutcome&, double)>& fn,
                      std::size_t limit = kDefaultEnumerationLimit);

double exact_expected_utility(const BatchGame& g, int player, const std::vector<double>& strategies);

// Points x_oracle + j * pitch inside [lo, hi].
std::vector<double> make_grid(double x_oracle, double pitch, double lo, double hi);

struct BestResponse {
    double argmax = 0.0;
    double value = 0.0;
    std::string method;  // "exact" or "monte-carlo"
    std::vector<double> grid;
    std::vector<double> values;
};

// Grid argmax of player i's expected utility with opponents fixed. Uses exact
// enumeration when possible, otherwise Monte Carlo with common random numbers
// (every grid point sees the same replicas).
BestResponse brute_force_best_response(const BatchGame& g, int player, const std::vector<double>& opponents,
                                       const std::vector<double>& grid, std::size_t n_replicas,
                                       std::uint64_t seed);

struct Histogram {
    std::vector<double> edges;  // bins + 1 entries
    std::vector<std::size_t> counts;
};

struct TraderExperience {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double mean_log = 0.0;
    std::vector<double> quantile_levels;
    std::vector<double> quantiles;
    Histogram histogram;
};

// Law of the normalized price p_bar = phi_bar(s_{alpha(k-1)}) a liquidity
// order meets, with k uniform over its slots. Slot 1 (priced by the top of
// block arbitrageur) is included unless `exclude_first_slot`.
TraderExperience trader_experience(const BatchGame& g, const std::vector<double>& strategies,
                                   std::size_t n_replicas, std::uint64_t seed, bool exclude_first_slot = false,
                                   int bins = 20);

}  // namespace lamination
