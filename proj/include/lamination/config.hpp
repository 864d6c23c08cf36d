#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lamination/equilibrium.hpp"
#include "lamination/extensions.hpp"
#include "lamination/game.hpp"

namespace lamination {

inline constexpr int kConfigSchema = 1;

struct MarketSpec {
    std::string kind = "cpmm";  // cpmm | exponential | reference
    double alpha = 1.0;
    double beta = 1.0;
    double epsilon = kDefaultDepthEpsilon;
    double lambda = 2.0;
    double x_ref = 1.0;
    double p_ref = 1.0;
    double price = 1.0;
    bool operator==(const MarketSpec&) const = default;
};

struct DistSpec {
    std::string kind = "point";  // point | uniform | truncated_normal | two_point | discrete
    double value = 0.0;
    double a = 0.0;
    double b = 0.0;
    double mu = 0.0;
    double sigma = 1.0;
    double r_plus = 0.0;
    double r_minus = 0.0;
    double p_plus = 0.5;
    std::vector<double> values;
    std::vector<double> probs;
    bool operator==(const DistSpec&) const = default;
};

struct FlowSpec {
    std::string kind = "iid";  // iid | deterministic | permuted | empirical
    DistSpec dist;
    int K = 1;
    std::vector<double> r;
    std::vector<std::vector<double>> samples;
    double scale = 1.0;
    bool operator==(const FlowSpec&) const = default;
};

struct AllocSpec {
    std::string kind = "bernoulli";  // bernoulli | monopoly | permuted | explicit
    std::vector<double> weights;
    int player = 1;
    int N = 1;
    std::vector<int> map;
    std::vector<std::vector<int>> maps;
    std::vector<double> probs;
    bool blind = true;
    bool operator==(const AllocSpec&) const = default;
};

struct SimulationSpec {
    std::uint64_t replicas = 20000;
    std::uint64_t seed = 1;
    double grid_pitch = 1e-3;      // relative to x_oracle
    double grid_halfwidth = 0.25;  // relative to x_oracle
    std::uint64_t traces = 10;
    bool exclude_first_slot = false;
    bool operator==(const SimulationSpec&) const = default;
};

struct LimitSpec {
    double r = 0.1;
    double q_depth = 1.09;
    std::string mode = "aon";  // aon | partial
    std::optional<double> x0;
    bool operator==(const LimitSpec&) const = default;
};

struct ExperimentConfig {
    int schema = kConfigSchema;
    MarketSpec market;
    FlowSpec flow;
    AllocSpec allocation;
    int K = 1;
    double x_oracle = 1.0;
    std::optional<DistSpec> x0;
    std::optional<ActionSpace> action_space;
    SolverOptions solver;
    SimulationSpec simulation;
    bool labelled = false;
    IndexLaw idx = IndexLaw::Uniform;
    std::vector<int> known_idx;
    std::optional<LimitSpec> limit;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError with the offending key path in its context.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

MarketCurve build_market(const ExperimentConfig& cfg);
SizeDistribution build_distribution(const DistSpec& spec);
OrderFlowModel build_flow(const ExperimentConfig& cfg);
AllocationModel build_allocation(const ExperimentConfig& cfg);
BatchGame build_game(const ExperimentConfig& cfg);
LabelledGame build_labelled_game(const ExperimentConfig& cfg);
LimitSandwich build_limit(const ExperimentConfig& cfg);

// Best-response grid around x_oracle at the configured pitch, clipped to A.
std::vector<double> build_grid(const ExperimentConfig& cfg, const BatchGame& g);

}  // namespace lamination
