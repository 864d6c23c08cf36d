#include "lamination/orderflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "lamination/errors.hpp"
#include "lamination/numerics.hpp"

namespace lamination {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw PreconditionError(std::string(name) + " must be finite", {{name, format_double(v)}});
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<std::size_t>::max() / b) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

}  // namespace

SizeDistribution SizeDistribution::point_mass(double r) {
    require_finite(r, "r");
    return SizeDistribution(PointMass{r});
}

SizeDistribution SizeDistribution::uniform(double a, double b) {
    require_finite(a, "a");
    require_finite(b, "b");
    if (!(a < b)) throw PreconditionError("uniform interval needs a < b", {{"a", format_double(a)}, {"b", format_double(b)}});
    return SizeDistribution(UniformInterval{a, b});
}

SizeDistribution SizeDistribution::truncated_normal(double mu, double sigma, double a, double b) {
    require_finite(mu, "mu");
    require_finite(a, "a");
    require_finite(b, "b");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw PreconditionError("sigma must be positive", {{"sigma", format_double(sigma)}});
    if (!(a < b)) throw PreconditionError("truncation interval needs a < b", {{"a", format_double(a)}, {"b", format_double(b)}});
    if (!(std_normal_cdf((b - mu) / sigma) - std_normal_cdf((a - mu) / sigma) > 0.0)) {
        throw PreconditionError("truncation interval carries no normal mass");
    }
    return SizeDistribution(TruncatedNormal{mu, sigma, a, b});
}

SizeDistribution SizeDistribution::two_point(double r_plus, double r_minus, double p_plus) {
    require_finite(r_plus, "r_plus");
    require_finite(r_minus, "r_minus");
    if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw PreconditionError("p_plus must lie in [0, 1]", {{"p_plus", format_double(p_plus)}});
    return SizeDistribution(DiscreteTwoPoint{r_plus, r_minus, p_plus});
}

SizeDistribution SizeDistribution::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size()) {
        throw PreconditionError("discrete law needs matching non-empty values and probabilities");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        require_finite(values[j], "value");
        if (!(probs[j] >= 0.0)) throw PreconditionError("probabilities must be non-negative");
        total += probs[j];
    }
    if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("probabilities must sum to one", {{"sum", format_double(total)}});
    for (double& p : probs) p /= total;
    return SizeDistribution(DiscreteAtoms{std::move(values), std::move(probs)});
}

std::string SizeDistribution::kind_name() const {
    return std::visit(overloaded{[](const PointMass&) { return "point"; }, [](const UniformInterval&) { return "uniform"; },
                                 [](const TruncatedNormal&) { return "truncated_normal"; },
                                 [](const DiscreteTwoPoint&) { return "two_point"; },
                                 [](const DiscreteAtoms&) { return "discrete"; }},
                      kind_);
}

std::pair<double, double> SizeDistribution::support() const {
    return std::visit(
        overloaded{[](const PointMass& d) { return std::pair{d.r, d.r}; },
                   [](const UniformInterval& d) { return std::pair{d.a, d.b}; },
                   [](const TruncatedNormal& d) { return std::pair{d.a, d.b}; },
                   [](const DiscreteTwoPoint& d) {
                       if (d.p_plus == 1.0) return std::pair{d.r_plus, d.r_plus};
                       if (d.p_plus == 0.0) return std::pair{d.r_minus, d.r_minus};
                       return std::pair{std::min(d.r_plus, d.r_minus), std::max(d.r_plus, d.r_minus)};
                   },
                   [](const DiscreteAtoms& d) {
                       double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                       for (std::size_t j = 0; j < d.values.size(); ++j) {
                           if (d.probs[j] <= 0.0) continue;
                           lo = std::min(lo, d.values[j]);
                           hi = std::max(hi, d.values[j]);
                       }
                       return std::pair{lo, hi};
                   }},
        kind_);
}

bool SizeDistribution::is_discrete() const noexcept {
    return !std::holds_alternative<UniformInterval>(kind_) && !std::holds_alternative<TruncatedNormal>(kind_);
}

std::vector<Atom> SizeDistribution::atoms() const {
    return std::visit(overloaded{[](const PointMass& d) { return std::vector<Atom>{{d.r, 1.0}}; },
                                 [](const DiscreteTwoPoint& d) {
                                     std::vector<Atom> out;
                                     if (d.p_plus > 0.0) out.push_back({d.r_plus, d.p_plus});
                                     if (d.p_plus < 1.0) out.push_back({d.r_minus, 1.0 - d.p_plus});
                                     return out;
                                 },
                                 [](const DiscreteAtoms& d) {
                                     std::vector<Atom> out;
                                     for (std::size_t j = 0; j < d.values.size(); ++j) {
                                         if (d.probs[j] > 0.0) out.push_back({d.values[j], d.probs[j]});
                                     }
                                     return out;
                                 },
                                 [this](const auto&) -> std::vector<Atom> {
                                     throw UnsupportedError("atoms requested for continuous law " + kind_name());
                                 }},
                      kind_);
}

double SizeDistribution::sample(Rng& rng) const {
    return std::visit(overloaded{[](const PointMass& d) { return d.r; },
                                 [&rng](const UniformInterval& d) { return d.a + (d.b - d.a) * rng.uniform(); },
                                 [&rng](const TruncatedNormal& d) {
                                     const double lo = std_normal_cdf((d.a - d.mu) / d.sigma);
                                     const double hi = std_normal_cdf((d.b - d.mu) / d.sigma);
                                     const double p = lo + (hi - lo) * rng.uniform_open();
                                     return std::clamp(d.mu + d.sigma * std_normal_quantile(p), d.a, d.b);
                                 },
                                 [&rng](const DiscreteTwoPoint& d) { return rng.uniform() < d.p_plus ? d.r_plus : d.r_minus; },
                                 [&rng](const DiscreteAtoms& d) { return d.values[rng.categorical(d.probs)]; }},
                      kind_);
}

double SizeDistribution::mgf(double lambda) const {
    return std::visit(
        overloaded{[lambda](const PointMass& d) { return std::exp(-lambda * d.r); },
                   [lambda](const UniformInterval& d) {
                       if (lambda == 0.0) return 1.0;
                       // (e^{-la} - e^{-lb}) / (l (b - a)), written to avoid cancellation
                       return std::exp(-lambda * d.a) * -std::expm1(-lambda * (d.b - d.a)) / (lambda * (d.b - d.a));
                   },
                   [lambda](const TruncatedNormal& d) {
                       const double t = -lambda;
                       const double alpha = (d.a - d.mu) / d.sigma, beta = (d.b - d.mu) / d.sigma;
                       const double mass = std_normal_cdf(beta) - std_normal_cdf(alpha);
                       const double shifted = std_normal_cdf(beta - d.sigma * t) - std_normal_cdf(alpha - d.sigma * t);
                       return std::exp(d.mu * t + 0.5 * d.sigma * d.sigma * t * t) * shifted / mass;
                   },
                   [lambda](const DiscreteTwoPoint& d) {
                       return d.p_plus * std::exp(-lambda * d.r_plus) + (1.0 - d.p_plus) * std::exp(-lambda * d.r_minus);
                   },
                   [lambda](const DiscreteAtoms& d) {
                       double acc = 0.0;
                       for (std::size_t j = 0; j < d.values.size(); ++j) acc += d.probs[j] * std::exp(-lambda * d.values[j]);
                       return acc;
                   }},
        kind_);
}

double SizeDistribution::mean() const {
    return std::visit(overloaded{[](const PointMass& d) { return d.r; },
                                 [](const UniformInterval& d) { return 0.5 * (d.a + d.b); },
                                 [](const TruncatedNormal& d) {
                                     const double alpha = (d.a - d.mu) / d.sigma, beta = (d.b - d.mu) / d.sigma;
                                     const double mass = std_normal_cdf(beta) - std_normal_cdf(alpha);
                                     const double pdf_a = std::exp(-0.5 * alpha * alpha), pdf_b = std::exp(-0.5 * beta * beta);
                                     return d.mu + d.sigma * (pdf_a - pdf_b) / (std::sqrt(2.0 * std::numbers::pi) * mass);
                                 },
                                 [](const DiscreteTwoPoint& d) { return d.p_plus * d.r_plus + (1.0 - d.p_plus) * d.r_minus; },
                                 [](const DiscreteAtoms& d) {
                                     return std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0);
                                 }},
                      kind_);
}

double SizeDistribution::expect(const std::function<double(double)>& f, double abs_tol) const {
    if (is_discrete()) {
        double acc = 0.0;
        for (const auto& atom : atoms()) acc += atom.prob * f(atom.value);
        return acc;
    }
    return std::visit(
        overloaded{[&](const UniformInterval& d) {
                       return numerics::gauss_legendre_refined(f, d.a, d.b, abs_tol * (d.b - d.a)) / (d.b - d.a);
                   },
                   [&](const TruncatedNormal& d) {
                       const double alpha = (d.a - d.mu) / d.sigma, beta = (d.b - d.mu) / d.sigma;
                       const double norm = d.sigma * std::sqrt(2.0 * std::numbers::pi) * (std_normal_cdf(beta) - std_normal_cdf(alpha));
                       auto weighted = [&](double r) {
                           const double z = (r - d.mu) / d.sigma;
                           return f(r) * std::exp(-0.5 * z * z) / norm;
                       };
                       return numerics::gauss_legendre_refined(weighted, d.a, d.b, abs_tol);
                   },
                   [](const auto&) -> double { return 0.0; }},
        kind_);
}

SizeDistribution SizeDistribution::scaled(double factor) const {
    if (factor == 0.0) return point_mass(0.0);
    return std::visit(overloaded{[factor](const PointMass& d) { return point_mass(d.r * factor); },
                                 [factor](const UniformInterval& d) {
                                     return uniform(std::min(d.a * factor, d.b * factor), std::max(d.a * factor, d.b * factor));
                                 },
                                 [factor](const TruncatedNormal& d) {
                                     if (factor > 0) return truncated_normal(d.mu * factor, d.sigma * factor, d.a * factor, d.b * factor);
                                     return truncated_normal(d.mu * factor, -d.sigma * factor, d.b * factor, d.a * factor);
                                 },
                                 [factor](const DiscreteTwoPoint& d) {
                                     return two_point(d.r_plus * factor, d.r_minus * factor, d.p_plus);
                                 },
                                 [factor](const DiscreteAtoms& d) {
                                     auto values = d.values;
                                     for (double& v : values) v *= factor;
                                     return discrete(std::move(values), d.probs);
                                 }},
                      kind_);
}

// --- OrderFlowModel --------------------------------------------------------

namespace {

void require_sizes(const std::vector<double>& r, const char* what) {
    if (r.empty()) throw PreconditionError(std::string(what) + " needs at least one order");
    for (double v : r) require_finite(v, "order size");
}

}  // namespace

OrderFlowModel OrderFlowModel::deterministic(std::vector<double> r) {
    require_sizes(r, "deterministic flow");
    const int K = static_cast<int>(r.size());
    return OrderFlowModel(DeterministicFlow{std::move(r)}, K);
}

OrderFlowModel OrderFlowModel::iid(SizeDistribution dist, int K) {
    if (K < 1) throw PreconditionError("iid flow needs K >= 1", {{"K", std::to_string(K)}});
    return OrderFlowModel(IidFlow{std::move(dist), K}, K);
}

OrderFlowModel OrderFlowModel::permuted(std::vector<double> r) {
    require_sizes(r, "permuted flow");
    const int K = static_cast<int>(r.size());
    return OrderFlowModel(PermutedFlow{std::move(r)}, K);
}

OrderFlowModel OrderFlowModel::empirical(std::vector<std::vector<double>> samples) {
    if (samples.empty()) throw PreconditionError("empirical flow needs samples");
    const std::size_t K = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != K) throw PreconditionError("empirical samples must share one length");
        require_sizes(s, "empirical sample");
    }
    return OrderFlowModel(EmpiricalFlow{std::move(samples)}, static_cast<int>(K));
}

std::string OrderFlowModel::kind_name() const {
    return std::visit(overloaded{[](const DeterministicFlow&) { return "deterministic"; }, [](const IidFlow&) { return "iid"; },
                                 [](const PermutedFlow&) { return "permuted"; }, [](const EmpiricalFlow&) { return "empirical"; }},
                      kind_);
}

std::vector<double> OrderFlowModel::sample(Rng& rng) const {
    return std::visit(overloaded{[](const DeterministicFlow& f) { return f.r; },
                                 [&rng](const IidFlow& f) {
                                     std::vector<double> out(static_cast<std::size_t>(f.K));
                                     for (double& v : out) v = f.dist.sample(rng);
                                     return out;
                                 },
                                 [&rng](const PermutedFlow& f) {
                                     auto out = f.r;
                                     rng.shuffle(std::span<double>(out));
                                     return out;
                                 },
                                 [&rng](const EmpiricalFlow& f) { return f.samples[rng.index(f.samples.size())]; }},
                      kind_);
}

SizeDistribution OrderFlowModel::marginal(int k) const {
    if (k < 1 || k > K_) throw PreconditionError("slot index out of range", {{"k", std::to_string(k)}});
    const auto idx = static_cast<std::size_t>(k - 1);
    return std::visit(overloaded{[idx](const DeterministicFlow& f) { return SizeDistribution::point_mass(f.r[idx]); },
                                 [](const IidFlow& f) { return f.dist; },
                                 [](const PermutedFlow& f) {
                                     return SizeDistribution::discrete(f.r, std::vector<double>(f.r.size(), 1.0 / static_cast<double>(f.r.size())));
                                 },
                                 [idx](const EmpiricalFlow& f) {
                                     std::vector<double> values;
                                     values.reserve(f.samples.size());
                                     for (const auto& s : f.samples) values.push_back(s[idx]);
                                     const double p = 1.0 / static_cast<double>(values.size());
                                     return SizeDistribution::discrete(std::move(values), std::vector<double>(f.samples.size(), p));
                                 }},
                      kind_);
}

bool OrderFlowModel::is_symmetric() const {
    return std::visit(overloaded{[](const DeterministicFlow& f) {
                                     return std::all_of(f.r.begin(), f.r.end(), [&](double v) { return v == f.r.front(); });
                                 },
                                 [](const IidFlow&) { return true; }, [](const PermutedFlow&) { return true; },
                                 [](const EmpiricalFlow& f) {
                                     // identical multisets of coordinate values
                                     std::vector<double> first;
                                     for (const auto& s : f.samples) first.push_back(s[0]);
                                     std::sort(first.begin(), first.end());
                                     for (std::size_t k = 1; k < f.samples.front().size(); ++k) {
                                         std::vector<double> col;
                                         for (const auto& s : f.samples) col.push_back(s[k]);
                                         std::sort(col.begin(), col.end());
                                         if (col != first) return false;
                                     }
                                     return true;
                                 }},
                      kind_);
}

std::pair<double, double> OrderFlowModel::support() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto absorb = [&](double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    std::visit(overloaded{[&](const DeterministicFlow& f) { std::for_each(f.r.begin(), f.r.end(), absorb); },
                          [&](const IidFlow& f) {
                              const auto [a, b] = f.dist.support();
                              absorb(a);
                              absorb(b);
                          },
                          [&](const PermutedFlow& f) { std::for_each(f.r.begin(), f.r.end(), absorb); },
                          [&](const EmpiricalFlow& f) {
                              for (const auto& s : f.samples) std::for_each(s.begin(), s.end(), absorb);
                          }},
               kind_);
    return {lo, hi};
}

std::size_t OrderFlowModel::outcome_count() const {
    return std::visit(overloaded{[](const DeterministicFlow&) -> std::size_t { return 1; },
                                 [](const IidFlow& f) -> std::size_t {
                                     if (!f.dist.is_discrete()) return 0;
                                     const std::size_t n = f.dist.atoms().size();
                                     std::size_t total = 1;
                                     for (int k = 0; k < f.K; ++k) total = saturating_mul(total, n);
                                     return total;
                                 },
                                 [](const PermutedFlow& f) -> std::size_t {
                                     std::size_t total = 1;
                                     for (std::size_t k = 2; k <= f.r.size(); ++k) total = saturating_mul(total, k);
                                     return total;
                                 },
                                 [](const EmpiricalFlow& f) -> std::size_t { return f.samples.size(); }},
                      kind_);
}

std::vector<FlowOutcome> OrderFlowModel::outcomes() const {
    if (outcome_count() == 0) throw UnsupportedError("flow " + kind_name() + " has a continuous law");
    return std::visit(
        overloaded{[](const DeterministicFlow& f) { return std::vector<FlowOutcome>{{f.r, 1.0}}; },
                   [](const IidFlow& f) {
                       const auto atoms = f.dist.atoms();
                       std::vector<FlowOutcome> out{{{}, 1.0}};
                       for (int k = 0; k < f.K; ++k) {
                           std::vector<FlowOutcome> next;
                           next.reserve(out.size() * atoms.size());
                           for (const auto& partial : out) {
                               for (const auto& atom : atoms) {
                                   auto r = partial.r;
                                   r.push_back(atom.value);
                                   next.push_back({std::move(r), partial.prob * atom.prob});
                               }
                           }
                           out = std::move(next);
                       }
                       return out;
                   },
                   [](const PermutedFlow& f) {
                       std::vector<std::size_t> perm(f.r.size());
                       std::iota(perm.begin(), perm.end(), std::size_t{0});
                       std::vector<FlowOutcome> out;
                       do {
                           std::vector<double> r;
                           r.reserve(perm.size());
                           for (std::size_t p : perm) r.push_back(f.r[p]);
                           out.push_back({std::move(r), 0.0});
                       } while (std::next_permutation(perm.begin(), perm.end()));
                       for (auto& o : out) o.prob = 1.0 / static_cast<double>(out.size());
                       return out;
                   },
                   [](const EmpiricalFlow& f) {
                       std::vector<FlowOutcome> out;
                       for (const auto& s : f.samples) out.push_back({s, 1.0 / static_cast<double>(f.samples.size())});
                       return out;
                   }},
        kind_);
}

OrderFlowModel OrderFlowModel::scaled(double factor) const {
    auto scale_vec = [factor](std::vector<double> r) {
        for (double& v : r) v *= factor;
        return r;
    };
    return std::visit(overloaded{[&](const DeterministicFlow& f) { return deterministic(scale_vec(f.r)); },
                                 [&](const IidFlow& f) { return iid(f.dist.scaled(factor), f.K); },
                                 [&](const PermutedFlow& f) { return permuted(scale_vec(f.r)); },
                                 [&](const EmpiricalFlow& f) {
                                     auto samples = f.samples;
                                     for (auto& s : samples) s = scale_vec(std::move(s));
                                     return empirical(std::move(samples));
                                 }},
                      kind_);
}

// --- impact ----------------------------------------------------------------

double expected_phi(const MarketCurve& m, const SizeDistribution& law, double s, const ImpactOptions& options) {
    const auto [lo, hi] = law.support();
    m.require_in_domain(s, "strategy depth");
    m.require_in_domain(s + lo, "depth after smallest order");
    m.require_in_domain(s + hi, "depth after largest order");

    if (const auto* e = std::get_if<ExponentialCurve>(&m.kind()); e && !options.force_numeric) {
        // phi(s + r) = phi(s) e^{-lambda r}: the expectation splits into phi(s) * M_r(lambda)
        return m.phi(s) * law.mgf(e->lambda);
    }
    const double scale = m.phi(s + lo);
    return law.expect([&m, s](double r) { return m.phi(s + r); }, options.abs_tol * std::max(1.0, scale));
}

double expected_impact(const OrderFlowModel& f, const MarketCurve& m, double x_oracle, int k, const ImpactOptions& options) {
    return expected_phi(m, f.marginal(k), x_oracle, options) / m.phi(x_oracle);
}

}  // namespace lamination
