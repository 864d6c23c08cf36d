#pragma once

#include "lamination/allocation.hpp"
#include "lamination/market.hpp"
#include "lamination/orderflow.hpp"

namespace lamination {

// Closed interval of admissible target depths.
struct ActionSpace {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    bool operator==(const ActionSpace&) const = default;
};

inline ActionSpace default_action_space(double x_oracle) { return {0.5 * x_oracle, 2.0 * x_oracle}; }

// The full game: venue, order flow, slot allocation, initial depth law,
// oracle depth and action space. Validated at construction.
class BatchGame {
public:
    BatchGame(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle,
              SizeDistribution x0, ActionSpace action_space);
    BatchGame(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle = 1.0);

    const MarketCurve& market() const noexcept { return market_; }
    const OrderFlowModel& flow() const noexcept { return flow_; }
    const AllocationModel& allocation() const noexcept { return alloc_; }
    const SizeDistribution& initial_depth() const noexcept { return x0_; }
    const ActionSpace& action_space() const noexcept { return action_space_; }
    const CostContext& cost() const noexcept { return cost_; }

    int K() const noexcept { return flow_.K(); }
    int N() const noexcept { return alloc_.N(); }
    double x_oracle() const noexcept { return x_oracle_; }
    double oracle_price() const noexcept { return cost_.anchor_price(); }

    BatchGame with_flow(OrderFlowModel flow) const;
    BatchGame with_allocation(AllocationModel alloc) const;

private:
    MarketCurve market_;
    OrderFlowModel flow_;
    AllocationModel alloc_;
    double x_oracle_;
    SizeDistribution x0_;
    ActionSpace action_space_;
    CostContext cost_;
};

}  // namespace lamination
