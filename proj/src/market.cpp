#include "lamination/market.hpp"

#include <algorithm>
#include <cmath>

#include "lamination/errors.hpp"
#include "lamination/numerics.hpp"

namespace lamination {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kCustomQuadratureTol = 1e-12;
constexpr int kMonotoneSamples = 1000;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw PreconditionError(std::string(name) + " must be positive and finite", {{name, format_double(v)}});
    }
}

void require_valid_domain(const DepthInterval& d) {
    if (!(d.lo >= 0.0) || !(d.hi > d.lo)) {
        throw PreconditionError("market domain must satisfy 0 <= lo < hi",
                                {{"lo", format_double(d.lo)}, {"hi", format_double(d.hi)}});
    }
}

}  // namespace

MarketCurve MarketCurve::cpmm(double alpha_w, double beta_w, double epsilon) {
    require_positive(alpha_w, "alpha");
    require_positive(beta_w, "beta");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw PreconditionError("cpmm epsilon must lie in (0, 1)", {{"epsilon", format_double(epsilon)}});
    }
    return MarketCurve(WeightedCpmm{alpha_w, beta_w}, DepthInterval{epsilon, 1.0 / epsilon});
}

MarketCurve MarketCurve::exponential(double lambda, double x_ref, double p_ref, DepthInterval domain) {
    require_positive(lambda, "lambda");
    require_positive(x_ref, "x_ref");
    require_positive(p_ref, "p_ref");
    require_valid_domain(domain);
    return MarketCurve(ExponentialCurve{lambda, x_ref, p_ref}, domain);
}

MarketCurve MarketCurve::reference(double price, DepthInterval domain) {
    require_positive(price, "price");
    require_valid_domain(domain);
    return MarketCurve(ConstantReference{price}, domain);
}

MarketCurve MarketCurve::custom(CustomCurve curve, DepthInterval domain) {
    require_valid_domain(domain);
    if (!curve.phi) throw PreconditionError("custom market needs a price density");

    // Sample the open domain; unbounded domains are compactified by t/(1-t).
    const double scale = std::max(1.0, domain.lo);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kMonotoneSamples; ++k) {
        const double t = (k + 0.5) / kMonotoneSamples;
        const double x = std::isinf(domain.hi) ? domain.lo + scale * t / (1.0 - t)
                                                : domain.lo + t * (domain.hi - domain.lo);
        const double value = curve.phi(x);
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw PreconditionError("custom price density must be positive on its domain",
                                    {{"x", format_double(x)}, {"phi", format_double(value)}});
        }
        if (value > previous * (1.0 + 1e-12)) {
            throw PreconditionError("custom price density is not monotone decreasing",
                                    {{"x", format_double(x)}, {"phi", format_double(value)}});
        }
        previous = value;
    }
    return MarketCurve(std::move(curve), domain);
}

std::string MarketCurve::kind_name() const {
    return std::visit(overloaded{[](const WeightedCpmm&) { return std::string("cpmm"); },
                                 [](const ExponentialCurve&) { return std::string("exponential"); },
                                 [](const ConstantReference&) { return std::string("reference"); },
                                 [](const CustomCurve& c) { return c.label; }},
                      kind_);
}

void MarketCurve::require_in_domain(double x, const char* what) const {
    if (!domain_.contains(x)) {
        throw DomainError(std::string(what) + " outside market domain",
                          {{"x", format_double(x)}, {"lo", format_double(domain_.lo)}, {"hi", format_double(domain_.hi)}});
    }
}

double MarketCurve::phi_unchecked(double x) const {
    return std::visit(overloaded{[x](const WeightedCpmm& c) { return std::pow(x, -(1.0 + c.alpha_w / c.beta_w)); },
                                 [x](const ExponentialCurve& c) { return c.p_ref * std::exp(-c.lambda * (x - c.x_ref)); },
                                 [](const ConstantReference& c) { return c.price; },
                                 [x](const CustomCurve& c) { return c.phi(x); }},
                      kind_);
}

double MarketCurve::phi(double x) const {
    require_in_domain(x);
    return phi_unchecked(x);
}

double MarketCurve::action(double x, double y) const {
    require_in_domain(x);
    require_in_domain(y);
    if (x == y) return 0.0;
    return std::visit(
        overloaded{[x, y](const WeightedCpmm& c) {
                       const double e = 1.0 - (1.0 + c.alpha_w / c.beta_w);  // < 0
                       return (std::pow(y, e) - std::pow(x, e)) / e;
                   },
                   [x, y](const ExponentialCurve& c) {
                       // p_ref/lambda * (exp(-lambda(x-xr)) - exp(-lambda(y-xr)))
                       const double ex = std::exp(-c.lambda * (x - c.x_ref));
                       return c.p_ref / c.lambda * ex * -std::expm1(-c.lambda * (y - x));
                   },
                   [x, y](const ConstantReference& c) { return c.price * (y - x); },
                   [this, x, y](const CustomCurve& c) {
                       if (c.antiderivative) return c.antiderivative(y) - c.antiderivative(x);
                       return numerics::adaptive_simpson([this](double u) { return phi_unchecked(u); }, x, y,
                                                         kCustomQuadratureTol);
                   }},
        kind_);
}

double MarketCurve::log_slope(double x) const {
    require_in_domain(x);
    return std::visit(overloaded{[x](const WeightedCpmm& c) { return (1.0 + c.alpha_w / c.beta_w) / x; },
                                 [](const ExponentialCurve& c) { return c.lambda; },
                                 [](const ConstantReference&) { return 0.0; },
                                 [this, x](const CustomCurve&) {
                                     const double h = 1e-6 * std::max(1.0, std::abs(x));
                                     require_in_domain(x - h);
                                     require_in_domain(x + h);
                                     return -(std::log(phi_unchecked(x + h)) - std::log(phi_unchecked(x - h))) / (2.0 * h);
                                 }},
                      kind_);
}

bool MarketCurve::invertible() const noexcept { return !std::holds_alternative<ConstantReference>(kind_); }

bool MarketCurve::has_closed_form_antiderivative() const noexcept {
    if (const auto* c = std::get_if<CustomCurve>(&kind_)) return static_cast<bool>(c->antiderivative);
    return true;
}

CostContext::CostContext(MarketCurve market, double anchor)
    : market_(std::move(market)), anchor_(anchor), anchor_price_(market_.phi(anchor)) {}

double CostContext::cost(double x) const { return anchor_price_ * (x - anchor_) + market_.action(x, anchor_); }

double CostContext::cost_derivative(double x) const { return anchor_price_ - market_.phi(x); }

double CostContext::cyclic_arbitrage_payout(double x, double y) const {
    return market_.action(x, y) + anchor_price_ * (x - y);
}

double cpmm_lambda(double alpha_w, double beta_w) {
    require_positive(alpha_w, "alpha");
    require_positive(beta_w, "beta");
    return 1.0 + alpha_w / beta_w;
}

double normalized_phi(const MarketCurve& m, double x_oracle, double x) { return m.phi(x) / m.phi(x_oracle); }

LinearizationBound linearization_error(const MarketCurve& m, double x_ref, double lambda, double r_lo, double r_hi) {
    if (r_lo > r_hi) std::swap(r_lo, r_hi);
    m.require_in_domain(x_ref, "reference depth");
    m.require_in_domain(x_ref + r_lo, "x_ref + r_lo");
    m.require_in_domain(x_ref + r_hi, "x_ref + r_hi");
    const double log_ref = std::log(m.phi(x_ref));
    auto gap = [&](double r) { return std::abs(std::log(m.phi(x_ref + r)) - log_ref + lambda * r); };

    if (r_lo == r_hi) return {gap(r_lo), r_lo};

    constexpr int cells = 10000;
    const double pitch = (r_hi - r_lo) / cells;
    int best = 0;
    double best_value = -1.0;
    for (int j = 0; j <= cells; ++j) {
        const double r = (j == cells) ? r_hi : r_lo + j * pitch;
        const double v = gap(r);
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }
    LinearizationBound out{best_value, best == cells ? r_hi : r_lo + best * pitch};
    const double a = std::max(r_lo, out.argmax - pitch);
    const double b = std::min(r_hi, out.argmax + pitch);
    const auto refined = numerics::golden_section_max(gap, a, b, 1e-9);
    if (refined.fx > out.bound) out = {refined.fx, refined.x};
    return out;
}

}  // namespace lamination
