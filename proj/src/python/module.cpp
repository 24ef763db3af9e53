#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "hklab/bounds.hpp"
#include "hklab/io.hpp"
#include "hklab/lab.hpp"
#include "hklab/scenario.hpp"
#include "hklab/zoo.hpp"

namespace py = pybind11;
using namespace hklab;

namespace {

struct PyGraph {
    std::shared_ptr<const WeightedGraph> g;
    const WeightedGraph& ref() const { return *g; }
};

PyGraph wrap(WeightedGraph g) {
    return PyGraph{std::make_shared<const WeightedGraph>(std::move(g))};
}

zoo::Measure measure_of(const std::string& name) {
    if (name == "counting") return zoo::Measure::counting;
    if (name == "normalizing") return zoo::Measure::normalizing;
    if (name == "uniform") return zoo::Measure::uniform;
    throw GraphError("unknown measure choice: " + name);
}

}  // namespace

PYBIND11_MODULE(_hklab, m) {
    m.doc() = "heat kernel laboratory for weighted-graph Laplacians";
    m.attr("__version__") = kVersion;

    py::register_exception<GraphError>(m, "GraphError");

    py::class_<PyGraph>(m, "Graph")
        .def_static("load",
                    [](const std::string& path) {
                        return wrap(WeightedGraph::build(load_graph_json(path)));
                    })
        .def("save", [](const PyGraph& self,
                        const std::string& path) { save_graph_json(self.ref().to_data(), path); })
        .def_property_readonly("vertex_count",
                               [](const PyGraph& self) { return self.ref().vertex_count(); })
        .def_property_readonly("edge_count",
                               [](const PyGraph& self) { return self.ref().edge_count(); })
        .def_property_readonly(
            "measure", [](const PyGraph& self) { return Eigen::VectorXd(self.ref().measure()); })
        .def_property_readonly("total_measure",
                               [](const PyGraph& self) { return self.ref().total_measure(); })
        .def("id_of", [](const PyGraph& self, int x) { return self.ref().id_of(x); })
        .def("index_of",
             [](const PyGraph& self, const std::string& id) { return self.ref().index_of(id); })
        .def("deg", [](const PyGraph& self, int x) { return self.ref().deg(x); })
        .def("weighted_degree",
             [](const PyGraph& self, int x) { return self.ref().weighted_degree(x); })
        .def("is_dirichlet", [](const PyGraph& self, int x) { return self.ref().is_dirichlet(x); })
        .def("laplacian", [](const PyGraph& self,
                             const VertexFunction& f) { return laplacian_apply(self.ref(), f); })
        .def("gradient_norm", [](const PyGraph& self, const VertexFunction& f,
                                 int x) { return gradient_norm(self.ref(), f, x); })
        .def("combinatorial_interior",
             [](const PyGraph& self, const VertexSet& a) {
                 return combinatorial_interior(self.ref(), a);
             })
        .def("sandwiched_laplacian",
             [](const PyGraph& self, const VertexFunction& omega, const VertexFunction& v) {
                 return sandwiched_apply(self.ref(), omega, v);
             })
        .def("h_omega",
             [](const PyGraph& self, const VertexFunction& omega) {
                 return h_omega(self.ref(), omega);
             });

    m.def("validate_graph_file", [](const std::string& path) {
        std::vector<std::string> out;
        for (const auto& v : validate(load_graph_json(path)))
            out.push_back("[" + v.where + "] " + v.what);
        return out;
    });

    m.def(
        "cycle",
        [](int n, const std::string& measure) { return wrap(zoo::cycle(n, measure_of(measure))); },
        py::arg("n"), py::arg("measure") = "counting");
    m.def(
        "path",
        [](int n, const std::string& measure, bool dirichlet_ends) {
            return wrap(zoo::path(n, measure_of(measure), dirichlet_ends));
        },
        py::arg("n"), py::arg("measure") = "counting", py::arg("dirichlet_ends") = false);
    m.def(
        "complete",
        [](int n, const std::string& measure) {
            return wrap(zoo::complete(n, measure_of(measure)));
        },
        py::arg("n"), py::arg("measure") = "counting");
    m.def(
        "lattice_box",
        [](int w, int h, const std::string& measure, bool dirichlet_frame) {
            return wrap(zoo::lattice_box(w, h, measure_of(measure), dirichlet_frame));
        },
        py::arg("width"), py::arg("height"), py::arg("measure") = "counting",
        py::arg("dirichlet_frame") = false);
    m.def(
        "antitree",
        [](double gamma, int spheres, const std::string& measure, bool truncate) {
            return wrap(zoo::antitree(gamma, spheres, measure_of(measure), truncate));
        },
        py::arg("gamma"), py::arg("sphere_count"), py::arg("measure") = "counting",
        py::arg("truncate") = false);
    m.def(
        "random_weighted",
        [](int n, double edge_prob, double weight_lo, double weight_hi, std::uint64_t seed,
           const std::string& measure) {
            return wrap(
                zoo::random_weighted(n, edge_prob, {weight_lo, weight_hi}, seed,
                                     measure_of(measure)));
        },
        py::arg("n"), py::arg("edge_prob"), py::arg("weight_lo") = 1.0,
        py::arg("weight_hi") = 1.0, py::arg("seed") = 1, py::arg("measure") = "counting");

    py::class_<IntrinsicMetric>(m, "Metric")
        .def_property_readonly("jump_size", &IntrinsicMetric::jump_size)
        .def_property_readonly("matrix",
                               [](const IntrinsicMetric& self) { return self.matrix(); })
        .def_property_readonly("intrinsic_slack",
                               [](const IntrinsicMetric& self) {
                                   return Eigen::VectorXd(self.intrinsic_slack());
                               })
        .def("is_intrinsic", [](const IntrinsicMetric& self) { return self.intrinsic(); })
        .def("distance", [](const IntrinsicMetric& self, int x, int y) { return self(x, y); })
        .def("ball", [](const IntrinsicMetric& self, int x, double r) { return ball(self, x, r); });

    m.def(
        "default_metric",
        [](const PyGraph& g, double cap) { return default_intrinsic_metric(g.ref(), cap); },
        py::arg("graph"), py::arg("cap") = 1.0);
    m.def("combinatorial_metric",
          [](const PyGraph& g) { return combinatorial_metric(g.ref()); });
    m.def("cutoff", [](const PyGraph& g, const IntrinsicMetric& rho, const VertexSet& a,
                       double r) { return cutoff(g.ref(), rho, a, r); });

    py::class_<HeatSystem>(m, "HeatSystem")
        .def_property_readonly("eigenvalues",
                               [](const HeatSystem& self) { return self.eigenvalues(); })
        .def_property_readonly("lambda_bottom", &HeatSystem::lambda_bottom)
        .def("kernel", [](const HeatSystem& self, double t) { return self.heat_kernel(t).p; })
        .def("kernel_at",
             [](const HeatSystem& self, double t, int x, int y) {
                 return self.heat_kernel(t, x, y);
             })
        .def("apply", [](const HeatSystem& self, double t,
                         const VertexFunction& f) { return self.apply(t, f); })
        .def("apply_sandwiched",
             [](const HeatSystem& self, const VertexFunction& omega, double t,
                const VertexFunction& f) { return self.apply_sandwiched(omega, t, f); });

    m.def("heat_system", [](const PyGraph& g) { return HeatSystem::build(g.g); });
    m.def(
        "expm_action",
        [](const PyGraph& g, double t, const VertexFunction& f, double tol) {
            return expm_action(g.ref(), t, f, tol);
        },
        py::arg("graph"), py::arg("t"), py::arg("f"), py::arg("tol") = 1e-10);

    py::class_<GeometryParams>(m, "GeometryParams")
        .def(py::init([](double n, double d, double p) {
                 GeometryParams params{n, d, p};
                 params.validate();
                 return params;
             }),
             py::arg("n"), py::arg("d"),
             py::arg("p") = std::numeric_limits<double>::infinity())
        .def_readonly("n", &GeometryParams::n)
        .def_readonly("d", &GeometryParams::d)
        .def_readonly("p", &GeometryParams::p)
        .def_property_readonly("q", &GeometryParams::q)
        .def_property_readonly("alpha", &GeometryParams::alpha)
        .def_property_readonly("beta", &GeometryParams::beta);

    m.def("ball_volume", [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r) {
        return ball_volume(g.ref(), rho, x, r);
    });
    m.def("degree_mean", [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r,
                            double p) { return degree_mean(g.ref(), rho, x, r, p); });
    m.def("inverse_measure_mean",
          [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r, double p) {
              return inverse_measure_mean(g.ref(), rho, x, r, p);
          });
    m.def("mu_term", [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r, double d,
                        double q) { return mu_term(g.ref(), rho, x, r, d, q); });
    m.def("kappa_theta", [](double r, double jump, double beta) {
        auto e = kappa_theta(r, jump, beta);
        return py::make_tuple(e.kappa, e.theta);
    });
    m.def("moser_step_count", &moser_step_count);
    m.def("mean_value_min_radius", &mean_value_min_radius);
    m.def("gamma_error", [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r,
                            const GeometryParams& params) {
        return gamma_error(g.ref(), rho, x, r, params);
    });

    py::class_<SobolevEstimate>(m, "SobolevEstimate")
        .def_readonly("constant", &SobolevEstimate::constant)
        .def_readonly("radius", &SobolevEstimate::radius)
        .def_readonly("converged", &SobolevEstimate::converged)
        .def_readonly("certificate", &SobolevEstimate::certificate);
    py::class_<SVEstimate>(m, "SVEstimate")
        .def_readonly("center", &SVEstimate::center)
        .def_readonly("sobolev", &SVEstimate::sobolev)
        .def_readonly("doubling", &SVEstimate::doubling)
        .def_readonly("converged", &SVEstimate::converged)
        .def_readonly("pass_flag", &SVEstimate::pass);

    m.def(
        "sobolev_constant",
        [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r, double n,
           int random_starts, int max_iterations, std::uint64_t seed) {
            return sobolev_constant(g.ref(), rho, x, r, n,
                                    {random_starts, max_iterations, seed});
        },
        py::arg("graph"), py::arg("metric"), py::arg("center"), py::arg("radius"), py::arg("n"),
        py::arg("random_starts") = 4, py::arg("max_iterations") = 400, py::arg("seed") = 1);
    m.def(
        "doubling_constant",
        [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r1, double r2, double d) {
            return doubling_constant(g.ref(), rho, x, r1, r2, d).constant;
        });
    m.def(
        "sv_check",
        [](const PyGraph& g, const IntrinsicMetric& rho, int x, double r1, double r2, double n,
           double d) { return sv_check(g.ref(), rho, x, r1, r2, n, d); });

    m.def("zeta", &zeta, py::arg("r"), py::arg("t"), py::arg("jump_size") = 1.0);
    m.def("sigma", &sigma, py::arg("r"), py::arg("t"), py::arg("jump_size") = 1.0);
    m.def("poly_correction", &poly_correction, py::arg("r"), py::arg("t"),
          py::arg("jump_size") = 1.0, py::arg("n") = 3.0);
    m.def("davies_exponent_optimizer", [](double r, double t, double jump) {
        auto opt = davies_exponent_optimizer(r, t, jump);
        return py::make_tuple(opt.eta_star, opt.f_value);
    });

    py::class_<CheckSummary>(m, "CheckSummary")
        .def_readonly("total", &CheckSummary::total)
        .def_readonly("passed", &CheckSummary::passed)
        .def_readonly("failed", &CheckSummary::failed)
        .def_readonly("skipped", &CheckSummary::skipped)
        .def_readonly("vacuous", &CheckSummary::vacuous);
    py::class_<BoundSummary>(m, "BoundSummary")
        .def_readonly("total", &BoundSummary::total)
        .def_readonly("passed", &BoundSummary::passed)
        .def_readonly("vacuous", &BoundSummary::vacuous)
        .def_readonly("min_log_margin", &BoundSummary::min_log_margin);

    m.def(
        "run_certify",
        [](const std::string& scenario_path, const std::string& certificates_out) {
            auto scenario = load_scenario(scenario_path);
            auto bench = open_workbench(scenario);
            auto result = run_certify(scenario, bench);
            write_sv_json(*bench.graph, result.estimates, certificates_out);
            return result.all_pass;
        },
        py::arg("scenario"), py::arg("certificates_out"));
    m.def(
        "run_verify",
        [](const std::string& scenario_path, const std::string& certificates,
           const std::vector<std::string>& suite) {
            auto scenario = load_scenario(scenario_path);
            if (!suite.empty()) scenario.suite = suite;
            auto bench = open_workbench(scenario);
            return run_verify(scenario, bench, certificates).summary;
        },
        py::arg("scenario"), py::arg("certificates") = std::string(),
        py::arg("suite") = std::vector<std::string>());
    m.def(
        "run_scan",
        [](const std::string& scenario_path, const std::string& certificates,
           const std::string& bounds_csv) {
            auto scenario = load_scenario(scenario_path);
            auto bench = open_workbench(scenario);
            auto result = run_scan(scenario, bench, certificates);
            if (!bounds_csv.empty()) write_bound_csv(result.reports, bounds_csv);
            return result.summary;
        },
        py::arg("scenario"), py::arg("certificates") = std::string(),
        py::arg("bounds_csv") = std::string());
}
