#include "popdyn/analysis.hpp"
#include "popdyn/config.hpp"
#include "popdyn/delays.hpp"
#include "popdyn/game.hpp"
#include "popdyn/io.hpp"
#include "popdyn/revision.hpp"
#include "popdyn/runner.hpp"
#include "popdyn/simulator.hpp"
#include "popdyn/tuner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace popdyn;

namespace {

ProtocolParams make_params(double rho, int n) { return ProtocolParams{rho, n}; }

py::dict report_to_dict(const RunReport& r) {
    py::dict d;
    d["final_ne_dist"] = r.final_ne_dist;
    d["final_transit_mass"] = r.final_transit_mass;
    d["osc_amplitude"] = r.osc_amplitude;
    d["mean_transit_mass_tail"] = r.mean_transit_mass_tail;
    d["update_count"] = r.update_count;
    d["converged"] = r.converged;
    d["clipped_mass"] = r.clipped_mass;
    d["max_mass_error"] = r.max_mass_error;
    d["tuner_terminated"] = r.tuner_terminated;
    py::dict v;
    v["x_rate"] = r.bound_violations.x_rate;
    v["y_rate"] = r.bound_violations.y_rate;
    v["envelope"] = r.bound_violations.envelope;
    v["passivity"] = r.bound_violations.passivity;
    v["delta_passivity"] = r.bound_violations.delta_passivity;
    d["bound_violations"] = v;
    return d;
}

py::dict trace_to_dict(const std::vector<TrajectorySample>& trace) {
    const auto m = static_cast<Eigen::Index>(trace.size());
    const Eigen::Index n = m ? trace.front().x.size() : 0;
    Vec t(m), lambda(m), s_bar(m), ne_dist(m), transit(m);
    Mat x(m, n), y(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const TrajectorySample& s = trace[static_cast<std::size_t>(i)];
        t(i) = s.t;
        lambda(i) = s.lambda;
        s_bar(i) = s.s_bar;
        ne_dist(i) = s.ne_dist;
        transit(i) = s.transit_mass;
        x.row(i) = s.x;
        y.row(i) = s.y.colwise().sum();
    }
    py::dict d;
    d["t"] = t;
    d["x"] = x;
    d["y"] = y;
    d["lambda"] = lambda;
    d["s_bar"] = s_bar;
    d["ne_dist"] = ne_dist;
    d["transit_mass"] = transit;
    return d;
}

py::list updates_to_list(const std::vector<UpdateRecord>& log) {
    py::list out;
    for (const UpdateRecord& u : log) {
        py::dict d;
        d["k"] = u.k;
        d["t"] = u.t;
        d["lambda"] = u.lambda;
        d["dot_val"] = u.dot_val;
        d["f_val"] = u.f_val;
        d["floored"] = u.floored;
        out.append(d);
    }
    return out;
}

py::dict run_result_to_dict(const RunResult& res) {
    py::dict d;
    d["trace"] = trace_to_dict(res.trace);
    d["updates"] = updates_to_list(res.update_log);
    d["report"] = report_to_dict(res.report);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Delayed evolutionary dynamics in population games with revision-rate tuning";

    py::class_<GameDefinition>(m, "Game")
        .def_readonly("n", &GameDefinition::n)
        .def_readonly("bound_df", &GameDefinition::bound_df)
        .def_readonly("linear", &GameDefinition::linear)
        .def_readonly("name", &GameDefinition::name)
        .def_readonly("ne_set", &GameDefinition::ne_set)
        .def("payoff", [](const GameDefinition& g, const Vec& x) { return evaluate_payoff(g, x); },
             py::arg("x"))
        .def("jacobian",
             [](const GameDefinition& g, const Vec& x) { return evaluate_jacobian(g, x); },
             py::arg("x"));

    py::class_<CertifiedConstants>(m, "CertifiedConstants")
        .def_readonly("N", &CertifiedConstants::N)
        .def_readonly("M", &CertifiedConstants::M)
        .def_readonly("K", &CertifiedConstants::K)
        .def_readonly("L", &CertifiedConstants::L)
        .def_readonly("b_df", &CertifiedConstants::b_df)
        .def_readonly("rho", &CertifiedConstants::rho)
        .def_readonly("d_max", &CertifiedConstants::d_max)
        .def_readonly("d_i", &CertifiedConstants::d_i)
        .def_readonly("delta", &CertifiedConstants::delta);

    m.def("rps_game", &make_rps_game, py::arg("a") = 1.0, py::arg("b") = 2.0);
    m.def("linear_game", &make_linear_game, py::arg("matrix"),
          py::arg("ne") = std::vector<Vec>{});

    m.def("estimate_bound_df", &estimate_bound_df, py::arg("game"),
          py::arg("grid_resolution") = 50);
    m.def(
        "verify_contractive",
        [](const GameDefinition& g, int samples) {
            const ContractivityReport r = verify_contractive(g, samples);
            py::dict d;
            d["contractive"] = r.contractive;
            d["worst_value"] = r.worst_value;
            d["witness_x"] = r.witness_x;
            d["witness_tangent"] = r.witness_tangent;
            return d;
        },
        py::arg("game"), py::arg("sample_count") = 1000);
    m.def("ne_residual", &ne_residual, py::arg("game"), py::arg("x"));
    m.def("nash_distance", &nash_distance, py::arg("game"), py::arg("x"));
    m.def(
        "max_valid_rho",
        [](const GameDefinition& g, int grid) {
            const RhoCalibration c = max_valid_rho(g, grid);
            py::dict d;
            d["rho"] = c.rho;
            d["worst_gap_sum"] = c.worst_gap_sum;
            d["any_rho_valid"] = c.any_rho_valid;
            return d;
        },
        py::arg("game"), py::arg("grid_resolution") = 200);

    m.def(
        "edm_field",
        [](const Vec& x, const Vec& p, double rho) {
            return edm_field(x, p, make_params(rho, static_cast<int>(x.size())));
        },
        py::arg("x"), py::arg("p"), py::arg("rho"));
    m.def(
        "storage",
        [](const Vec& x, const Vec& p, double rho) {
            return storage(x, p, make_params(rho, static_cast<int>(x.size())));
        },
        py::arg("x"), py::arg("p"), py::arg("rho"));
    m.def(
        "grad_x_storage",
        [](const Vec& x, const Vec& p, double rho) {
            return grad_x_storage(x, p, make_params(rho, static_cast<int>(x.size())));
        },
        py::arg("x"), py::arg("p"), py::arg("rho"));

    m.def("abs_diff_delays", [](int n) { return make_abs_diff_delays(n).d; }, py::arg("n"));
    m.def(
        "compute_constants",
        [](const GameDefinition& g, double rho, const Mat& delays, double delta) {
            return compute_constants(g, make_params(rho, g.n), make_delay_matrix(delays), delta);
        },
        py::arg("game"), py::arg("rho"), py::arg("delays"), py::arg("delta") = 0.25);
    m.def("epsilon", &epsilon, py::arg("lambda_"), py::arg("consts"), py::arg("n"));
    m.def("epsilon_bar", &epsilon_bar, py::arg("lambda_"), py::arg("consts"), py::arg("n"));

    m.def(
        "simulate",
        [](const std::string& config_text) {
            const ExperimentConfig cfg = parse_config_text(config_text, "<python>");
            const ResolvedExperiment exp = resolve(cfg);
            return run_result_to_dict(run_experiment(exp));
        },
        py::arg("config_json"),
        "Run one experiment from a JSON config string; returns trace, updates, report.");
    m.def(
        "simulate_file",
        [](const std::string& path) {
            const ResolvedExperiment exp = resolve(parse_config_file(path));
            return run_result_to_dict(run_experiment(exp));
        },
        py::arg("path"));
    m.def(
        "run_baseline",
        [](const GameDefinition& g, double rho, const Vec& x0, double lambda, double h,
           double horizon) {
            return trace_to_dict(
                run_baseline_edm(g, make_params(rho, g.n), x0, lambda, h, horizon));
        },
        py::arg("game"), py::arg("rho"), py::arg("x0"), py::arg("lambda_"), py::arg("h"),
        py::arg("horizon"));
}
