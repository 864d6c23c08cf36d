#include "lamination/game.hpp"

#include <string>

#include "lamination/errors.hpp"

namespace lamination {

BatchGame::BatchGame(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle,
                     SizeDistribution x0, ActionSpace action_space)
    : market_(std::move(market)),
      flow_(std::move(flow)),
      alloc_(std::move(alloc)),
      x_oracle_(x_oracle),
      x0_(std::move(x0)),
      action_space_(action_space),
      cost_(market_, x_oracle) {
    if (alloc_.K() != flow_.K()) {
        throw ConfigError("allocation and order flow disagree on K",
                          {{"allocation_K", std::to_string(alloc_.K())}, {"flow_K", std::to_string(flow_.K())}});
    }
    if (!(action_space_.lo <= action_space_.hi) || !action_space_.contains(x_oracle_)) {
        throw ConfigError("action space must be an interval containing the oracle depth",
                          {{"lo", format_double(action_space_.lo)}, {"hi", format_double(action_space_.hi)}});
    }
    const auto [r_lo, r_hi] = flow_.support();
    const auto [x0_lo, x0_hi] = x0_.support();
    try {
        market_.require_in_domain(action_space_.lo, "action space lower bound");
        market_.require_in_domain(action_space_.hi, "action space upper bound");
        market_.require_in_domain(action_space_.lo + std::min(r_lo, 0.0), "action space plus smallest order");
        market_.require_in_domain(action_space_.hi + std::max(r_hi, 0.0), "action space plus largest order");
        market_.require_in_domain(x0_lo, "initial depth");
        market_.require_in_domain(x0_hi, "initial depth");
        market_.require_in_domain(x0_lo + std::min(r_lo, 0.0), "initial depth plus smallest order");
        market_.require_in_domain(x0_hi + std::max(r_hi, 0.0), "initial depth plus largest order");
    } catch (const DomainError& e) {
        throw ConfigError(std::string("game escapes the market domain: ") + e.what(), e.context());
    }
}

BatchGame::BatchGame(MarketCurve market, OrderFlowModel flow, AllocationModel alloc, double x_oracle)
    : BatchGame(std::move(market), std::move(flow), std::move(alloc), x_oracle, SizeDistribution::point_mass(x_oracle),
                default_action_space(x_oracle)) {}

BatchGame BatchGame::with_flow(OrderFlowModel flow) const {
    return BatchGame(market_, std::move(flow), alloc_, x_oracle_, x0_, action_space_);
}

BatchGame BatchGame::with_allocation(AllocationModel alloc) const {
    return BatchGame(market_, flow_, std::move(alloc), x_oracle_, x0_, action_space_);
}

}  // namespace lamination
