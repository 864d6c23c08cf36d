#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lamination/equilibrium.hpp"
#include "lamination/game.hpp"
#include "lamination/simulator.hpp"

namespace lamination {

// ---- Per-slot pricing ----------------------------------------------------

enum class IndexLaw { Uniform, Known };

// Players quote one depth per label h in 1..K. A labelling bijection idx
// places label h at position idx(h) of the batch. The flow and the allocation
// are indexed by label; slot 0 of `alloc` is ignored and the first position's
// predecessor is nature (x0).
struct LabelledGame {
    MarketCurve market;
    OrderFlowModel flow;
    AllocationModel alloc;
    double x_oracle = 1.0;
    SizeDistribution x0 = SizeDistribution::point_mass(1.0);
    ActionSpace action_space{0.5, 2.0};
    IndexLaw idx_law = IndexLaw::Uniform;
    std::vector<int> known_idx;  // idx(h) for h = 1..K when idx_law == Known

    int K() const { return flow.K(); }
    int N() const { return alloc.N(); }
    void validate() const;
};

LabelledGame make_labelled_game(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle = 1.0,
                                IndexLaw idx_law = IndexLaw::Uniform, std::vector<int> known_idx = {});

struct LabelledDraw {
    double x0 = 1.0;
    std::vector<double> r;    // by label
    std::vector<int> alpha;   // by label, players 1..N
    std::vector<int> idx;     // by label, positions 1..K
};

LabelledDraw sample_labelled_draw(const LabelledGame& lg, Rng& rng);

// prices[i-1][h-1] is player i's depth for label h.
using PriceTable = std::vector<std::vector<double>>;

PriceTable diagonal_prices(const std::vector<double>& per_player, int K);

double labelled_utility(const LabelledGame& lg, int player, const PriceTable& prices, const LabelledDraw& draw);

// The equivalent game over positions: flow and allocation pushed through idx,
// with an inert extra player N+1 holding slot 0.
BatchGame uniform_game(const LabelledGame& lg);
// The same draw seen by the uniform game; the inert player must quote draw.x0.
BatchOutcome to_uniform_outcome(const LabelledGame& lg, const LabelledDraw& draw);

struct LabelledBestResponse {
    std::vector<double> coordinates;  // argmax depth per label
    std::vector<bool> held;           // label ever allocated to the player
    int sweeps = 0;
    std::string method;               // "exact" or "monte-carlo"
};

// Coordinate-wise grid best response with the other coordinates held at the
// current iterate, repeated to a fixed point.
LabelledBestResponse labelled_best_response(const LabelledGame& lg, int player, const std::vector<double>& grid,
                                            std::size_t n_replicas, std::uint64_t seed, int max_sweeps = 50);

struct DiagonalCollapse {
    bool pass = false;
    double uniform_s_star = 0.0;
    double pitch = 0.0;
    double max_deviation = 0.0;
    LabelledBestResponse response;
};

// Labels carry no size information (iid or permuted flow, or K = 1). The
// diagonal collapse is only expected under a uniform index law when this holds.
bool flow_exchangeable(const OrderFlowModel& f);

// PASS when every held coordinate lies within one grid cell of the
// uniform-game solution.
DiagonalCollapse diagonal_collapse_check(const LabelledGame& lg, int player, const std::vector<double>& grid,
                                         std::size_t n_replicas, std::uint64_t seed,
                                         const SolverOptions& options = {});

// ---- Limit orders --------------------------------------------------------

enum class FillMode { PartialFill, AllOrNothing };

std::string to_string(FillMode mode);

// Monopolist sandwiching a single limit order of size r with limit depth q.
// The leading term of the payoff is the slot-0 backrun C(x0).
struct LimitSandwich {
    CostContext cost;
    double r = 0.1;
    double q = 1.09;
    FillMode mode = FillMode::AllOrNothing;
    double x0 = 1.0;
};

inline constexpr const char* kLeadingTermReading = "C(x0)";

// Depth after the limit order executes against a venue at depth s.
double limit_fill_depth(const LimitSandwich& ls, double s);

// C(x0) - C(s) + C(fill depth) - C(s).
double limit_sandwich_payoff(const LimitSandwich& ls, double s);

struct PhaseTransition {
    double boundary = 0.0;        // q - r
    double filled_limit = 0.0;    // payoff just on the filled side
    double unfilled_limit = 0.0;  // payoff just on the unfilled side
    double jump = 0.0;            // filled minus unfilled
    double scan_argmax = 0.0;
    double scan_max = 0.0;
    double passthrough_payoff = 0.0;  // U(x_oracle)
    bool better_than_passthrough = false;  // some scanned s < x_oracle beats U(x_oracle)
    double best_below_oracle = 0.0;
    std::string leading_term = kLeadingTermReading;
};

PhaseTransition detect_phase_transition(const LimitSandwich& ls, const std::vector<double>& scan,
                                        double offset = 1e-9);

}  // namespace lamination
