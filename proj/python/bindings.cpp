#include "pmclstd/bench.hpp"
#include "pmclstd/features.hpp"
#include "pmclstd/lstd.hpp"
#include "pmclstd/mdp.hpp"
#include "pmclstd/policy_iteration.hpp"
#include "pmclstd/prox.hpp"
#include "pmclstd/rng.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace pmclstd;

namespace {

SolveReport solve_dense(const LstdOperatorData& op, double mu, std::optional<double> tau, std::optional<Eigen::Index> q,
                        double tol, std::size_t max_iters, std::optional<Vector> w0) {
    EstimatorSettings s;
    s.method = (q && *q == 0) ? Method::l1 : Method::pmc;
    s.mu = mu;
    s.tau = tau;
    s.q = q;
    s.stop = {tol, max_iters};
    PmcSolverConfig config = resolve_config(op, s);
    const Vector start = w0 ? *w0 : Vector::Zero(op.dim());
    return pmc_lstd_solve(op, config, start, start);
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["solution"] = r.solution;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["residual"] = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse LSTD policy evaluation with projected minimax concave penalties";

    m.def("soft_threshold", &soft_threshold, py::arg("x"), py::arg("tau"));
    m.def("moreau_env_l1", &moreau_env_l1, py::arg("x"), py::arg("tau"));
    m.def("mc_penalty", &mc_penalty, py::arg("x"), py::arg("tau"));
    m.def(
        "pmc_penalty",
        [](const Vector& x, double tau, const Matrix& basis) { return pmc_penalty(x, tau, SubspaceBasis(basis)); },
        py::arg("x"), py::arg("tau"), py::arg("basis"),
        "Penalty with the envelope taken on span(basis); basis columns must be orthonormal.");
    m.def("resolvent_l1_minus_id", &resolvent_l1_minus_id, py::arg("x"), py::arg("eta"), py::arg("alpha"),
          py::arg("mu"));

    py::class_<LstdData>(m, "LstdData")
        .def(py::init([](Matrix phi, Matrix phi_next, Vector g, double gamma) {
                 return LstdData{std::move(phi), std::move(phi_next), std::move(g), gamma};
             }),
             py::arg("phi"), py::arg("phi_next"), py::arg("g"), py::arg("gamma"))
        .def_readwrite("phi", &LstdData::phi)
        .def_readwrite("phi_next", &LstdData::phi_next)
        .def_readwrite("g", &LstdData::g)
        .def_readwrite("gamma", &LstdData::gamma);

    py::class_<LstdOperatorData>(m, "LstdOperator")
        .def_readonly("a_tilde", &LstdOperatorData::a_tilde)
        .def_readonly("b_tilde", &LstdOperatorData::b_tilde)
        .def_readonly("gram_eigvals", &LstdOperatorData::gram_eigvals)
        .def_readonly("rank", &LstdOperatorData::rank)
        .def_readonly("lambda_min_pp", &LstdOperatorData::lambda_min_pp)
        .def_readonly("spectral_norm_a", &LstdOperatorData::spectral_norm_a)
        .def_property_readonly("dim", &LstdOperatorData::dim)
        .def("basis", [](const LstdOperatorData& op, Eigen::Index q) { return Matrix(op.basis(q).columns()); },
             py::arg("q"))
        .def("max_concavity", [](const LstdOperatorData& op, Eigen::Index q) { return max_concavity(op, q); },
             py::arg("q"));

    m.def("assemble_operator", &assemble_operator, py::arg("data"));
    m.def(
        "pmc_lstd_solve",
        [](const LstdOperatorData& op, double mu, std::optional<double> tau, std::optional<Eigen::Index> q, double tol,
           std::size_t max_iters, std::optional<Vector> w0) {
            return report_dict(solve_dense(op, mu, tau, q, tol, max_iters, std::move(w0)));
        },
        py::arg("op"), py::arg("mu"), py::arg("tau") = py::none(), py::arg("q") = py::none(), py::arg("tol") = 1e-8,
        py::arg("max_iters") = 100000, py::arg("w0") = py::none(),
        "Regularized LSTD fixed point. q=0 gives plain l1; tau and q default to the admissible choices.");
    m.def("lstd_closed_form", &lstd_closed_form, py::arg("op"), py::arg("ridge") = 0.0);

    py::class_<ChainMdpModel>(m, "ChainMdp")
        .def(py::init([](int n_states, double success_prob, double gamma) {
                 return ChainMdpModel::benchmark(n_states, success_prob, gamma);
             }),
             py::arg("n_states") = 20, py::arg("success_prob") = 0.9, py::arg("gamma") = 0.9)
        .def_readonly("n_states", &ChainMdpModel::n_states)
        .def_readonly("success_prob", &ChainMdpModel::success_prob)
        .def_readonly("gamma", &ChainMdpModel::gamma)
        .def_readonly("payoff", &ChainMdpModel::payoff);

    m.def(
        "exact_optimal",
        [](const ChainMdpModel& model) {
            const ExactSolution s = exact_optimal(model);
            std::vector<std::string> names;
            for (Action a : s.policy) names.emplace_back(action_name(a));
            return py::make_tuple(s.q, s.v, names);
        },
        py::arg("model"), "Returns (Q*, V*, policy) with policy entries 'left' / 'right'.");

    m.def(
        "chain_lstd_data",
        [](const ChainMdpModel& model, int n_rbf, int n_noise, std::size_t samples, std::uint64_t seed,
           const std::vector<std::string>& policy) {
            FeatureMapSpec spec = FeatureMapSpec::evenly_spaced(n_rbf, n_noise, model.n_states);
            spec.seed = derive_seed(seed, 1);
            const SampleBatch batch = sample_batch(model, samples, derive_seed(seed, 0));
            Policy pi;
            for (const auto& name : policy) pi.push_back(parse_action(name));
            return build_lstd_data(spec, batch, pi, model.gamma, model.n_states);
        },
        py::arg("model"), py::arg("n_rbf"), py::arg("n_noise"), py::arg("samples"), py::arg("seed"),
        py::arg("policy"), "Sampled LSTD data for evaluating `policy` with the RBF-plus-noise feature map.");

    m.def(
        "run_sweep",
        [](const std::string& config_text) {
            std::istringstream in(config_text);
            const SweepResult result = run_sweep(parse_config(in));
            std::ostringstream rows;
            write_results(result.rows, rows);
            return rows.str();
        },
        py::arg("config_text"), "Runs a benchmark sweep from config text and returns the results CSV.");
}
