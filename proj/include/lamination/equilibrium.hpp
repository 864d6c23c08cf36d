#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lamination/game.hpp"

namespace lamination {

struct SolverOptions {
    double depth_tol = 1e-12;     // absolute, in units of x_oracle
    double residual_tol = 1e-10;  // relative to the player's total primary weight
    double bracket_delta = 0.5;
    double bracket_growth = 2.0;
    int max_expansions = 20;
    int scan_points = 256;
    bool operator==(const SolverOptions&) const = default;
};

enum class SolveMethod { ExactRoot, ZetaClosedForm };

std::string to_string(SolveMethod method);

struct EquilibriumSolution {
    int player = 0;
    double s_star = 0.0;
    double phi_bar = 1.0;          // phi(s*) / p_oracle
    double log_coefficient = 0.0;  // log phi_bar
    double residual = 0.0;         // |lamination equation| at s*, in oracle-price units
    bool residual_ok = true;
    int iterations = 0;
    SolveMethod method = SolveMethod::ExactRoot;
    bool non_unique = false;  // more than one sign change found on the scan
    std::optional<double> zeta;
    std::optional<double> zeta_error_bound;
};

// d/ds of player i's expected utility:
//   sum_k a_{i,k} (phi(s) - b_{i,k} E[phi(s + r_k)] + (b_{i,k} - 1) phi(x_oracle)).
// Requires a blind allocation.
double expected_utility_derivative(const BatchGame& g, int player, double s);

// Root of expected_utility_derivative in the action space: the player's
// dominant-strategy target depth. Throws NoBracket outside the solvable regime.
EquilibriumSolution solve_lamination(const BatchGame& g, int player, const SolverOptions& options = {});

// Solves for every player with positive total weight.
std::vector<EquilibriumSolution> solve_all(const BatchGame& g, const SolverOptions& options = {});

// w K / (K + 1): the weight with the top-of-block slot folded in.
double effective_weight(double w, int K);

// (1 - w) / (1 - w M). Throws PoleError when w M >= 1.
double zeta(double w_check, double M);

struct SeriesResult {
    double partial_sum = 0.0;
    double remainder_bound = 0.0;
};

// Partial sum of log zeta(w, M) = sum_{n>=1} w^n (M^n - 1) / n with a geometric
// tail bound q^{n+1} / ((n+1)(1-q)), q = max(w, wM).
SeriesResult newton_mercator(double w_check, double M, int n_terms);

struct ZetaCertificate {
    double zeta = 1.0;
    double bound = 0.0;  // linearization error C
    double lambda = 0.0;
    double mgf = 1.0;
    double w_check = 0.0;
    double interval_lo = 0.0;  // offsets from x_oracle covered by the bound
    double interval_hi = 0.0;
    EquilibriumSolution solution;
};

// Symmetric flow and a blind Bernoulli (or monopoly) allocation.
bool zeta_applicable(const BatchGame& g);

// Zeta approximation and its linearization-error certificate for a player in
// a game with symmetric flow and blind independent Bernoulli allocation. The
// error bound covers every depth offset the lamination equation evaluates:
// {0, s* - x_oracle} plus the order-flow support.
ZetaCertificate zeta_error_bound(const BatchGame& g, int player, const SolverOptions& options = {});

// s* read off the zeta closed form: exact on exponential markets, an
// approximation with the certificate above otherwise.
EquilibriumSolution zeta_closed_form(const BatchGame& g, int player);

}  // namespace lamination
