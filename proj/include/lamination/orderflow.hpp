#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lamination/market.hpp"
#include "lamination/rng.hpp"

namespace lamination {

struct PointMass {
    double r = 0.0;
};
struct UniformInterval {
    double a = 0.0;
    double b = 0.0;
};
// Normal(mu, sigma^2) conditioned on [a, b].
struct TruncatedNormal {
    double mu = 0.0;
    double sigma = 1.0;
    double a = -1.0;
    double b = 1.0;
};
struct DiscreteTwoPoint {
    double r_plus = 0.0;
    double r_minus = 0.0;
    double p_plus = 0.5;
};
// Finite law; also the marginal of permuted and empirical flows.
struct DiscreteAtoms {
    std::vector<double> values;
    std::vector<double> probs;
};

struct Atom {
    double value;
    double prob;
};

// Law of a single signed order size (positive = sell). Bounded support.
class SizeDistribution {
public:
    using Kind = std::variant<PointMass, UniformInterval, TruncatedNormal, DiscreteTwoPoint, DiscreteAtoms>;

    static SizeDistribution point_mass(double r);
    static SizeDistribution uniform(double a, double b);
    static SizeDistribution truncated_normal(double mu, double sigma, double a, double b);
    static SizeDistribution two_point(double r_plus, double r_minus, double p_plus);
    static SizeDistribution discrete(std::vector<double> values, std::vector<double> probs);

    const Kind& kind() const noexcept { return kind_; }
    std::string kind_name() const;

    // Closed support [lo, hi].
    std::pair<double, double> support() const;
    bool is_discrete() const noexcept;
    // Atoms of a discrete law; throws UnsupportedError for continuous kinds.
    std::vector<Atom> atoms() const;

    double sample(Rng& rng) const;

    // E[exp(-lambda r)]. Note the sign: a sell (r > 0) lowers the price.
    double mgf(double lambda) const;
    double mean() const;

    // E[f(r)]: exact sum for discrete laws, refined Gauss-Legendre otherwise.
    double expect(const std::function<double(double)>& f, double abs_tol = 1e-12) const;

    SizeDistribution scaled(double factor) const;

private:
    explicit SizeDistribution(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

inline double mgf(const SizeDistribution& d, double lambda) { return d.mgf(lambda); }

struct DeterministicFlow {
    std::vector<double> r;
};
struct IidFlow {
    SizeDistribution dist;
    int K;
};
// A known vector delivered in uniformly random order.
struct PermutedFlow {
    std::vector<double> r;
};
// Uniform draw from a list of observed order vectors.
struct EmpiricalFlow {
    std::vector<std::vector<double>> samples;
};

struct FlowOutcome {
    std::vector<double> r;
    double prob;
};

// Joint law of the K liquidity order sizes.
class OrderFlowModel {
public:
    using Kind = std::variant<DeterministicFlow, IidFlow, PermutedFlow, EmpiricalFlow>;

    static OrderFlowModel deterministic(std::vector<double> r);
    static OrderFlowModel iid(SizeDistribution dist, int K);
    static OrderFlowModel permuted(std::vector<double> r);
    static OrderFlowModel empirical(std::vector<std::vector<double>> samples);

    const Kind& kind() const noexcept { return kind_; }
    std::string kind_name() const;
    int K() const noexcept { return K_; }

    std::vector<double> sample(Rng& rng) const;

    // Law of r_k, k in 1..K.
    SizeDistribution marginal(int k) const;

    // Identically distributed coordinates.
    bool is_symmetric() const;

    // Hull of every coordinate's support.
    std::pair<double, double> support() const;

    // Number of joint outcomes when every coordinate is discrete (saturates at
    // SIZE_MAX); 0 when the law is continuous.
    std::size_t outcome_count() const;
    // Exhaustive list of joint outcomes with probabilities.
    std::vector<FlowOutcome> outcomes() const;

    OrderFlowModel scaled(double factor) const;

private:
    OrderFlowModel(Kind kind, int K) : kind_(std::move(kind)), K_(K) {}
    Kind kind_;
    int K_;
};

inline std::vector<double> sample_orders(const OrderFlowModel& f, Rng& rng) { return f.sample(rng); }

struct ImpactOptions {
    // Skip the exponential-market closed form and integrate numerically.
    bool force_numeric = false;
    double abs_tol = 1e-12;
};

// E[phi(s + r)] for r with law `law`. Throws DomainError when s + supp(r)
// leaves the market domain.
double expected_phi(const MarketCurve& m, const SizeDistribution& law, double s, const ImpactOptions& options = {});

// Expected price impact factor at equilibrium, E[phi_bar(x_oracle + r_k)].
double expected_impact(const OrderFlowModel& f, const MarketCurve& m, double x_oracle, int k,
                       const ImpactOptions& options = {});

}  // namespace lamination
