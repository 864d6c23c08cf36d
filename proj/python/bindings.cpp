#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lamination/commands.hpp"
#include "lamination/equilibrium.hpp"
#include "lamination/market.hpp"

namespace py = pybind11;
using namespace lamination;

namespace {

// configs cross the boundary as JSON text; the python side owns dict <-> str
ExperimentConfig parse(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace

PYBIND11_MODULE(_lamination, m) {
    m.doc() = "laminated batch equilibrium core";

    static py::exception<Error> error(m, "LaminationError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            // payload is the same JSON the CLI prints on stderr
            py::set_error(error, error_json(e).dump().c_str());
        }
    });

    m.def("normalize_config", [](const std::string& text) { return to_json(parse(text)).dump(); });

    m.def("solve", [](const std::string& text) { return solve_report(parse(text)).dump(); });

    m.def("verify", [](const std::string& text) { return verify_report(parse(text)).dump(); });

    m.def(
        "simulate",
        [](const std::string& text, const std::string& out_dir) {
            const auto summary = run_simulation(parse(text), out_dir);
            py::list players;
            for (std::size_t i = 0; i < summary.strategies.size(); ++i) {
                py::dict d;
                d["player"] = i + 1;
                d["strategy"] = summary.strategies[i];
                d["mean_utility"] = summary.utilities[i].mean;
                d["std_error"] = summary.utilities[i].std_error;
                d["exact_expectation"] = summary.exact[i] ? py::cast(*summary.exact[i]) : py::none();
                players.append(d);
            }
            return players;
        },
        py::arg("config"), py::arg("out_dir"));

    m.def(
        "sweep",
        [](const std::string& text, const std::string& axis, const std::vector<double>& values) {
            std::ostringstream csv;
            run_sweep(parse(text), {axis, values}, csv);
            return csv.str();
        },
        py::arg("config"), py::arg("axis"), py::arg("values"));

    m.def("effective_weight", &effective_weight, py::arg("w"), py::arg("K"));
    m.def("zeta", &zeta, py::arg("w_check"), py::arg("M"));
    m.def(
        "newton_mercator",
        [](double w_check, double M, int n_terms) {
            const auto s = newton_mercator(w_check, M, n_terms);
            return py::make_tuple(s.partial_sum, s.remainder_bound);
        },
        py::arg("w_check"), py::arg("M"), py::arg("n_terms"));
    m.def(
        "cpmm_linearization_error",
        [](double r_lo, double r_hi, double alpha, double beta) {
            const auto m = MarketCurve::cpmm(alpha, beta);
            return linearization_error(m, 1.0, m.log_slope(1.0), r_lo, r_hi).bound;
        },
        py::arg("r_lo"), py::arg("r_hi"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0);
}
