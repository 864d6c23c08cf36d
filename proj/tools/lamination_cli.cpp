#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lamination/commands.hpp"

using namespace lamination;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    std::optional<std::string> out;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed, overrides the config");
    cmd->add_option("--replicas", f.replicas, "Monte Carlo replicas, overrides the config");
    cmd->add_option("--out", f.out, "output directory, overrides the config");
    cmd->add_flag("--quiet", f.quiet, "no report on stdout");
}

ExperimentConfig load(const Flags& f) {
    auto cfg = load_config(f.config);
    apply_overrides(cfg, {f.seed, f.replicas, f.out});
    return cfg;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file", {{"file", path.string()}});
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laminated batch equilibrium solver and simulator"};
    app.require_subcommand(1);
    Flags flags;

    auto* solve = app.add_subcommand("solve", "solve the lamination equation for every player");
    add_common(solve, flags);

    auto* simulate = app.add_subcommand("simulate", "run seeded batches and write traces and summaries");
    add_common(simulate, flags);

    std::string axis;
    double from = 0.0, to = 1.0;
    int steps = 10;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "solve over a grid of one config field, long-format CSV");
    add_common(sweep, flags);
    sweep->add_option("--axis", axis, "w | N | flow_scale | JSON pointer (e.g. /market/lambda)")->required();
    sweep->add_option("--from", from, "first axis value");
    sweep->add_option("--to", to, "last axis value");
    sweep->add_option("--steps", steps, "number of grid points");
    sweep->add_option("--values", values, "explicit axis values, replaces from/to/steps")->delimiter(',');

    auto* verify = app.add_subcommand("verify", "run oracle and invariant checks, exit 5 on failure");
    add_common(verify, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const auto cfg = load(flags);
        const std::filesystem::path out_dir = cfg.output_dir;
        if (*solve) {
            const auto report = solve_report(cfg);
            if (flags.out) write_json(out_dir / "solve.json", report);
            if (!flags.quiet) std::cout << report.dump(2) << '\n';
        } else if (*simulate) {
            const auto summary = run_simulation(cfg, out_dir);
            if (!flags.quiet) {
                for (std::size_t i = 0; i < summary.utilities.size(); ++i) {
                    std::cout << "player " << i + 1 << ": strategy " << format_double(summary.strategies[i])
                              << " mean utility " << format_double(summary.utilities[i].mean) << " +- "
                              << format_double(summary.utilities[i].std_error) << '\n';
                }
                std::cout << "wrote " << out_dir.string() << '\n';
            }
        } else if (*sweep) {
            SweepAxis sweep_axis{axis, values.empty() ? linspace(from, to, steps) : values};
            if (flags.out) {
                std::filesystem::create_directories(out_dir);
                std::ofstream csv(out_dir / "sweep.csv");
                run_sweep(cfg, sweep_axis, csv);
                if (!flags.quiet) std::cout << "wrote " << (out_dir / "sweep.csv").string() << '\n';
            } else {
                run_sweep(cfg, sweep_axis, std::cout);
            }
        } else if (*verify) {
            const auto report = verify_report(cfg);
            if (flags.out) write_json(out_dir / "verify.json", report);
            if (!flags.quiet) {
                for (const auto& p : report["properties"]) {
                    std::cout << (p["pass"].get<bool>() ? "PASS " : "FAIL ") << p["name"].get<std::string>() << ' '
                              << p["detail"].dump() << '\n';
                }
            }
            if (!report["pass"].get<bool>()) {
                std::cerr << nlohmann::json{{"code", "VerifyFailure"},
                                            {"message", "property checks failed"},
                                            {"context", {{"failing", report["failing"]}}}}
                                 .dump()
                          << '\n';
                return kExitVerify;
            }
        }
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"code", "InternalError"}, {"message", e.what()}, {"context", nlohmann::json::object()}}.dump()
                  << '\n';
        return 1;
    }
    return kExitOk;
}
