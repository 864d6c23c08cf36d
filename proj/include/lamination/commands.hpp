#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lamination/config.hpp"
#include "lamination/errors.hpp"

namespace lamination {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitDomain = 4,
    kExitVerify = 5,
};

int exit_code_for(const Error& e);
// {"code": ..., "message": ..., "context": {...}}
nlohmann::json error_json(const Error& e);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    std::optional<std::string> out_dir;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

nlohmann::json solution_json(const EquilibriumSolution& s);

// Per-player solutions (with zeta and its certificate where they apply),
// plus labelled and limit-order blocks when configured.
nlohmann::json solve_report(const ExperimentConfig& cfg);

struct SimulationSummary {
    std::vector<double> strategies;
    std::vector<McEstimate> utilities;
    std::vector<std::optional<double>> exact;
    std::optional<TraderExperience> trader;
};

// Writes traces.jsonl, utilities.csv, summary.csv and trader_experience.csv
// into `out_dir`.
SimulationSummary run_simulation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SweepAxis {
    std::string name;  // w | N | flow_scale | a JSON pointer such as /market/lambda
    std::vector<double> values;
};

std::vector<double> linspace(double from, double to, int steps);
ExperimentConfig apply_axis(const ExperimentConfig& cfg, const std::string& axis, double value);

inline constexpr const char* kSweepHeader =
    "point,axis,value,player,s_star,phi_bar,log_coefficient,zeta,log_zeta,zeta_error_bound,residual,method,error";

// Long-format CSV, one row per (grid point, player). Failed points become a
// single row carrying the error code.
void run_sweep(const ExperimentConfig& cfg, const SweepAxis& axis, std::ostream& csv);

// End-to-end property checks on the configured game; "pass" is true iff
// every property holds.
nlohmann::json verify_report(const ExperimentConfig& cfg);

}  // namespace lamination
