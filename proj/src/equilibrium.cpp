#include "lamination/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "lamination/errors.hpp"
#include "lamination/numerics.hpp"

namespace lamination {

std::string to_string(SolveMethod method) {
    return method == SolveMethod::ExactRoot ? "exact-root" : "zeta-closed-form";
}

namespace {

// Player i's first-order condition, pre-aggregated over slots:
//   total (phi(s) - p) - sum_j coupling_j (E_j[phi(s + r)] - p).
// Slots sharing one marginal law are merged when the flow is symmetric.
struct LaminationTerms {
    struct Coupling {
        double weight;  // a_{i,k} b_{i,k}
        SizeDistribution law;
    };

    const BatchGame* game;
    double total_weight = 0.0;
    std::vector<Coupling> couplings;

    LaminationTerms(const BatchGame& g, int player) : game(&g) {
        const auto& alloc = g.allocation();
        if (!alloc.blind()) {
            throw UnsupportedError("non-blind allocations have no conditional order-flow law here",
                                   {{"allocation", alloc.kind_name()}});
        }
        if (player < 1 || player > alloc.N()) {
            throw PreconditionError("player outside 1..N", {{"player", std::to_string(player)}});
        }
        total_weight = alloc.total_weight(player);
        const bool symmetric = g.flow().is_symmetric();
        double merged = 0.0;
        for (int k = 1; k <= g.K(); ++k) {
            const double c = alloc.joint_weight(player, k);
            if (c <= 0.0) continue;
            if (symmetric) {
                merged += c;
            } else {
                couplings.push_back({c, g.flow().marginal(k)});
            }
        }
        if (symmetric && merged > 0.0) couplings.push_back({merged, g.flow().marginal(1)});
    }

    bool locally_free() const { return couplings.empty(); }

    // Derivative in oracle-price units.
    double operator()(double s) const {
        const double p = game->oracle_price();
        const double phi_bar = game->market().phi(s) / p;
        double value = total_weight * (phi_bar - 1.0);
        for (const auto& c : couplings) {
            value -= c.weight * (expected_phi(game->market(), c.law, s) / p - 1.0);
        }
        return value;
    }
};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

EquilibriumSolution make_solution(const BatchGame& g, int player, const LaminationTerms& terms, double s,
                                  int iterations, const SolverOptions& options) {
    EquilibriumSolution out;
    out.player = player;
    out.s_star = s;
    out.phi_bar = normalized_phi(g.market(), g.x_oracle(), s);
    out.log_coefficient = std::log(out.phi_bar);
    out.residual = std::abs(terms(s));
    out.residual_ok = out.residual < options.residual_tol * terms.total_weight;
    out.iterations = iterations;
    return out;
}

}  // namespace

double expected_utility_derivative(const BatchGame& g, int player, double s) {
    return LaminationTerms(g, player)(s) * g.oracle_price();
}

EquilibriumSolution solve_lamination(const BatchGame& g, int player, const SolverOptions& options) {
    const LaminationTerms terms(g, player);
    if (!(terms.total_weight > 0.0)) {
        throw PreconditionError("player is never allocated a slot", {{"player", std::to_string(player)}});
    }
    const double x_oracle = g.x_oracle();
    const auto& A = g.action_space();
    const double x_tol = options.depth_tol * x_oracle;

    const double f_oracle = terms(x_oracle);
    if (f_oracle == 0.0) return make_solution(g, player, terms, x_oracle, 0, options);

    // Expand a bracket around the oracle depth until the derivative changes sign.
    double lo = x_oracle, hi = x_oracle, f_lo = f_oracle, f_hi = f_oracle;
    bool found = false;
    double delta = options.bracket_delta;
    for (int expansion = 0; expansion <= options.max_expansions && !found; ++expansion, delta *= options.bracket_growth) {
        const double cand_lo = std::max(A.lo, x_oracle * (1.0 - delta));
        const double cand_hi = std::min(A.hi, x_oracle * (1.0 + delta));
        const double f_cand_lo = terms(cand_lo);
        const double f_cand_hi = terms(cand_hi);
        if (sign_of(f_cand_lo) != sign_of(f_oracle)) {
            lo = cand_lo;
            f_lo = f_cand_lo;
            hi = x_oracle;
            f_hi = f_oracle;
            found = true;
        } else if (sign_of(f_cand_hi) != sign_of(f_oracle)) {
            lo = x_oracle;
            f_lo = f_oracle;
            hi = cand_hi;
            f_hi = f_cand_hi;
            found = true;
        } else if (cand_lo == A.lo && cand_hi == A.hi) {
            break;
        }
    }
    if (!found) {
        throw NoBracket("lamination derivative has no sign change in the action space",
                        {{"player", std::to_string(player)},
                         {"derivative_at_oracle", format_double(f_oracle)},
                         {"action_lo", format_double(A.lo)},
                         {"action_hi", format_double(A.hi)}});
    }

    const auto root = numerics::brent_root(terms, lo, f_lo, hi, f_hi, x_tol);
    auto best = make_solution(g, player, terms, root.x, root.iterations, options);

    // Uniqueness scan over the whole action space.
    const int n = std::max(options.scan_points, 2);
    std::vector<double> xs(static_cast<std::size_t>(n)), fs(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        xs[j] = (j == n - 1) ? A.hi : A.lo + (A.hi - A.lo) * j / (n - 1);
        fs[j] = terms(xs[j]);
    }
    int changes = 0;
    int last = -1;
    std::vector<std::pair<int, int>> cells;
    for (int j = 0; j < n; ++j) {
        if (sign_of(fs[j]) == 0) continue;
        if (last >= 0 && sign_of(fs[j]) != sign_of(fs[last])) {
            ++changes;
            cells.emplace_back(last, j);
        }
        last = j;
    }
    if (changes > 1) {
        best.non_unique = true;
        for (const auto& [a, b] : cells) {
            const auto r = numerics::brent_root(terms, xs[a], fs[a], xs[b], fs[b], x_tol);
            auto candidate = make_solution(g, player, terms, r.x, r.iterations, options);
            if (candidate.residual < best.residual) {
                candidate.non_unique = true;
                best = candidate;
            }
        }
    }
    return best;
}

std::vector<EquilibriumSolution> solve_all(const BatchGame& g, const SolverOptions& options) {
    std::vector<EquilibriumSolution> out;
    for (int i = 1; i <= g.N(); ++i) {
        if (g.allocation().total_weight(i) > 0.0) out.push_back(solve_lamination(g, i, options));
    }
    return out;
}

double effective_weight(double w, int K) {
    if (!(w >= 0.0 && w <= 1.0)) throw PreconditionError("weight must lie in [0, 1]", {{"w", format_double(w)}});
    if (K < 1) throw PreconditionError("K must be at least 1", {{"K", std::to_string(K)}});
    return static_cast<double>(K) * w / static_cast<double>(K + 1);
}

double zeta(double w_check, double M) {
    if (!(w_check >= 0.0 && w_check <= 1.0)) {
        throw PreconditionError("effective weight must lie in [0, 1]", {{"w_check", format_double(w_check)}});
    }
    if (w_check * M >= 1.0) {
        throw PoleError("zeta approximation at or beyond its pole (w_check * M >= 1)",
                        {{"w_check", format_double(w_check)}, {"M", format_double(M)}});
    }
    return (1.0 - w_check) / (1.0 - w_check * M);
}

SeriesResult newton_mercator(double w_check, double M, int n_terms) {
    if (!(w_check >= 0.0 && w_check < 1.0) || w_check * M >= 1.0) {
        throw PoleError("series diverges: need w_check < 1 and w_check * M < 1",
                        {{"w_check", format_double(w_check)}, {"M", format_double(M)}});
    }
    if (n_terms < 0) throw PreconditionError("term count must be non-negative");
    SeriesResult out;
    double w_pow = 1.0, m_pow = 1.0;
    for (int n = 1; n <= n_terms; ++n) {
        w_pow *= w_check;
        m_pow *= M;
        out.partial_sum += w_pow * (m_pow - 1.0) / n;
    }
    const double q = std::max(w_check, w_check * M);
    out.remainder_bound = std::pow(q, n_terms + 1) / ((n_terms + 1) * (1.0 - q));
    return out;
}

namespace {

struct ZetaInputs {
    double w_check;
    double lambda;
    double mgf;
};

ZetaInputs zeta_inputs(const BatchGame& g, int player) {
    // A monopoly is the degenerate Bernoulli allocation.
    const auto* bern = std::get_if<IndependentBernoulli>(&g.allocation().kind());
    const auto* mono = std::get_if<Monopoly>(&g.allocation().kind());
    if ((!bern && !mono) || !g.allocation().blind()) {
        throw UnsupportedError("zeta approximation needs a blind independent Bernoulli allocation",
                               {{"allocation", g.allocation().kind_name()}});
    }
    if (!g.flow().is_symmetric()) {
        throw UnsupportedError("zeta approximation needs identically distributed orders", {{"flow", g.flow().kind_name()}});
    }
    if (player < 1 || player > g.N()) throw PreconditionError("player outside 1..N", {{"player", std::to_string(player)}});
    ZetaInputs in;
    const double w = bern ? bern->weights[static_cast<std::size_t>(player - 1)] : (mono->player == player ? 1.0 : 0.0);
    in.w_check = effective_weight(w, g.K());
    in.lambda = g.market().log_slope(g.x_oracle());
    in.mgf = g.flow().marginal(1).mgf(in.lambda);
    return in;
}

}  // namespace

bool zeta_applicable(const BatchGame& g) {
    const auto& k = g.allocation().kind();
    return (std::holds_alternative<IndependentBernoulli>(k) || std::holds_alternative<Monopoly>(k)) &&
           g.allocation().blind() && g.flow().is_symmetric();
}

ZetaCertificate zeta_error_bound(const BatchGame& g, int player, const SolverOptions& options) {
    const auto in = zeta_inputs(g, player);
    ZetaCertificate cert;
    cert.w_check = in.w_check;
    cert.lambda = in.lambda;
    cert.mgf = in.mgf;
    cert.zeta = zeta(in.w_check, in.mgf);
    cert.solution = solve_lamination(g, player, options);

    const double u = cert.solution.s_star - g.x_oracle();
    const auto [r_lo, r_hi] = g.flow().support();
    cert.interval_lo = std::min(0.0, u) + std::min(0.0, r_lo);
    cert.interval_hi = std::max(0.0, u) + std::max(0.0, r_hi);
    cert.bound = linearization_error(g.market(), g.x_oracle(), in.lambda, cert.interval_lo, cert.interval_hi).bound;
    cert.solution.zeta = cert.zeta;
    cert.solution.zeta_error_bound = cert.bound;
    return cert;
}

EquilibriumSolution zeta_closed_form(const BatchGame& g, int player) {
    const auto in = zeta_inputs(g, player);
    const double z = zeta(in.w_check, in.mgf);
    EquilibriumSolution out;
    out.player = player;
    out.method = SolveMethod::ZetaClosedForm;
    out.zeta = z;
    out.log_coefficient = std::log(z);
    out.s_star = in.lambda > 0.0 ? g.x_oracle() - out.log_coefficient / in.lambda : g.x_oracle();
    out.phi_bar = g.market().contains(out.s_star) ? normalized_phi(g.market(), g.x_oracle(), out.s_star) : z;
    if (g.action_space().contains(out.s_star)) {
        const LaminationTerms terms(g, player);
        out.residual = std::abs(terms(out.s_star));
        out.residual_ok = out.residual < SolverOptions{}.residual_tol * terms.total_weight;
    } else {
        out.residual_ok = false;
    }
    return out;
}

}  // namespace lamination
