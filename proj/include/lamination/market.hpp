#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>

namespace lamination {

// Open interval of liquidity depths.
struct DepthInterval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x > lo && x < hi; }
};

inline constexpr double kDefaultDepthEpsilon = 1e-6;

// phi(x) = x^{-(1 + alpha_w/beta_w)}, normalized so phi(1) = 1.
struct WeightedCpmm {
    double alpha_w = 1.0;
    double beta_w = 1.0;
};

// phi(x_ref + t) = p_ref * exp(-lambda t).
struct ExponentialCurve {
    double lambda = 2.0;
    double x_ref = 1.0;
    double p_ref = 1.0;
};

// Infinitely deep venue quoting a constant price.
struct ConstantReference {
    double price = 1.0;
};

// User supplied price density. `antiderivative` may be empty, in which case
// the action is computed by adaptive quadrature.
struct CustomCurve {
    std::function<double(double)> phi;
    std::function<double(double)> antiderivative;
    std::string label = "custom";
};

// Monotone decreasing price density on an open depth interval. Immutable.
class MarketCurve {
public:
    using Kind = std::variant<WeightedCpmm, ExponentialCurve, ConstantReference, CustomCurve>;

    static MarketCurve cpmm(double alpha_w, double beta_w, double epsilon = kDefaultDepthEpsilon);
    static MarketCurve exponential(double lambda, double x_ref = 1.0, double p_ref = 1.0,
                                   DepthInterval domain = {kDefaultDepthEpsilon,
                                                           std::numeric_limits<double>::infinity()});
    static MarketCurve reference(double price, DepthInterval domain = {kDefaultDepthEpsilon,
                                                                       std::numeric_limits<double>::infinity()});
    // Validates positivity and monotonicity on 10^3 sampled depths.
    static MarketCurve custom(CustomCurve curve, DepthInterval domain);

    const Kind& kind() const noexcept { return kind_; }
    const DepthInterval& domain() const noexcept { return domain_; }
    std::string kind_name() const;

    bool contains(double x) const noexcept { return domain_.contains(x); }
    // Throws DomainError naming `what` when x is outside the domain.
    void require_in_domain(double x, const char* what = "depth") const;

    // Marginal price at depth x.
    double phi(double x) const;

    // Revenue of moving the depth from x to y: the integral of phi over [x, y].
    double action(double x, double y) const;

    // -(d/dx) log phi(x): analytic where available, central difference otherwise.
    double log_slope(double x) const;

    // Strictly decreasing (as opposed to merely monotone).
    bool invertible() const noexcept;

    bool has_closed_form_antiderivative() const noexcept;

private:
    MarketCurve(Kind kind, DepthInterval domain) : kind_(std::move(kind)), domain_(domain) {}

    double phi_unchecked(double x) const;

    Kind kind_;
    DepthInterval domain_;
};

inline double phi(const MarketCurve& m, double x) { return m.phi(x); }
inline double action(const MarketCurve& m, double x, double y) { return m.action(x, y); }

// Opportunity cost relative to an anchor depth:
//   C(x) = phi(anchor) (x - anchor) + action(x, anchor).
class CostContext {
public:
    CostContext(MarketCurve market, double anchor);

    const MarketCurve& market() const noexcept { return market_; }
    double anchor() const noexcept { return anchor_; }
    double anchor_price() const noexcept { return anchor_price_; }

    double cost(double x) const;
    // C'(x) = phi(anchor) - phi(x).
    double cost_derivative(double x) const;
    // Moving the venue from x to y and trading the same size back on the
    // reference market at the anchor price. Equals C(x) - C(y).
    double cyclic_arbitrage_payout(double x, double y) const;

private:
    MarketCurve market_;
    double anchor_;
    double anchor_price_;
};

inline double opportunity_cost(const CostContext& c, double x) { return c.cost(x); }
inline double opportunity_cost_derivative(const CostContext& c, double x) { return c.cost_derivative(x); }

// Magnitude of the log-slope of the weighted CPMM at unit depth.
double cpmm_lambda(double alpha_w, double beta_w);

// phi(x) / phi(x_oracle).
double normalized_phi(const MarketCurve& m, double x_oracle, double x);

struct LinearizationBound {
    double bound = 0.0;   // sup |log(phi(x_ref + r)/phi(x_ref)) + lambda r|
    double argmax = 0.0;  // offset r attaining it
};

// Grid supremum (10^4 cells plus endpoints) tightened by golden-section search
// around the grid argmax. This is a lower bound on the true supremum that is
// exact up to the refinement tolerance for piecewise smooth curves.
LinearizationBound linearization_error(const MarketCurve& m, double x_ref, double lambda, double r_lo, double r_hi);

}  // namespace lamination
