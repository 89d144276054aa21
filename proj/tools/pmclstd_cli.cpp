// Command-line harness: chain-walk sweeps, dataset solves, exact oracles
// and config validation.

#include "pmclstd/bench.hpp"
#include "pmclstd/features.hpp"
#include "pmclstd/lstd.hpp"
#include "pmclstd/mdp.hpp"
#include "pmclstd/policy_iteration.hpp"
#include "pmclstd/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace pmclstd;

struct SolveFlags {
    std::string data;
    std::string out;
    std::string method = "pmc";
    double mu = 0.0;
    std::string tau = "auto";
    std::string q = "auto";
    double ridge = 0.0;
    std::size_t max_iters = 100000;
    double tol = 1e-8;
};

EstimatorSettings settings_from(const SolveFlags& f) {
    EstimatorSettings s;
    s.method = parse_method(f.method);
    s.mu = f.mu;
    if (f.tau != "auto") s.tau = std::stod(f.tau);
    if (f.q != "auto") s.q = std::stol(f.q);
    s.ridge = f.ridge;
    s.stop = {f.tol, f.max_iters};
    return s;
}

void print_step_report(std::ostream& os, const LstdOperatorData& op, const EstimatorSettings& s) {
    os << "  " << method_name(s.method) << ' ' << s.describe() << ": ";
    if (s.method != Method::pmc && s.method != Method::l1) {
        os << "closed form\n";
        return;
    }
    try {
        const PmcSolverConfig c = resolve_config(op, s);
        os << "alpha=" << c.alpha << " beta=" << lipschitz_beta(c, op) << " epsilon=" << c.schedule.epsilon
           << " eta=" << c.schedule.at(0) << " tau=" << c.tau << " q=" << c.q << " ok\n";
    } catch (const std::invalid_argument& e) {
        os << "INADMISSIBLE: " << e.what() << '\n';
    }
}

int run_chainwalk(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
                  int workers, bool timing) {
    ExperimentConfig config = load_config(config_path);
    if (!out.empty()) config.output = out;
    if (seed) config.seed = *seed;
    if (workers > 0) config.workers = workers;
    if (timing) config.timing = true;
    if (config.output.empty()) throw std::runtime_error("no output path: set out= in the config or pass --out");
    const SweepResult result = run_sweep(config);
    write_sweep_outputs(result, config);
    std::cout << "wrote " << result.rows.size() << " rows to " << config.output << '\n';
    for (const auto& [key, mean] : mean_nmse(result.rows)) {
        std::cout << "  " << key.first << ' ' << method_name(key.second) << " mean_nmse=" << mean << '\n';
    }
    return 0;
}

int run_solve(const SolveFlags& flags) {
    std::ifstream in(flags.data);
    if (!in) throw std::runtime_error("cannot open dataset " + flags.data);
    const LstdData data = read_dataset(in);
    const LstdOperatorData op = assemble_operator(data);
    const EstimatorSettings settings = settings_from(flags);
    const EstimatorFit fit = fit_weights(op, settings);

    std::cerr << "n=" << op.dim() << " rank=" << op.rank << " lambda_min++=" << op.lambda_min_pp
              << " ||A||=" << op.spectral_norm_a << " iterations=" << fit.iterations
              << " converged=" << (fit.converged ? "yes" : "no") << '\n';
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!flags.out.empty()) {
        file.open(flags.out);
        if (!file) throw std::runtime_error("cannot write " + flags.out);
        os = &file;
    }
    *os << std::setprecision(17);
    for (const double w : fit.weights) *os << w << '\n';
    return fit.converged ? 0 : 3;
}

int run_exact(int states, double gamma, double success) {
    const ChainMdpModel model = ChainMdpModel::benchmark(states, success, gamma);
    const ExactSolution sol = exact_optimal(model);
    std::cout << "state,V*,Q*(left),Q*(right),pi*\n" << std::setprecision(12);
    for (int s = 1; s <= states; ++s) {
        // Reported in reward sense (the solvers minimize costs = -rewards).
        std::cout << s << ',' << -sol.v(s - 1) << ',' << -sol.q(s - 1, 0) << ',' << -sol.q(s - 1, 1) << ','
                  << action_name(sol.policy[s - 1]) << '\n';
    }
    return 0;
}

int run_validate(const std::string& config_path, const std::string& data_path, const SolveFlags& flags) {
    if (!data_path.empty()) {
        std::ifstream in(data_path);
        if (!in) throw std::runtime_error("cannot open dataset " + data_path);
        const LstdOperatorData op = assemble_operator(read_dataset(in));
        std::cout << "n=" << op.dim() << " rank=" << op.rank << " lambda_min++=" << op.lambda_min_pp
                  << " ||A||=" << op.spectral_norm_a << '\n';
        print_step_report(std::cout, op, settings_from(flags));
        return 0;
    }
    const ExperimentConfig config = load_config(config_path);
    std::cout << "config ok: " << config.values.size() << " sweep values x " << config.methods.size()
              << " methods x " << config.trials << " trials = "
              << config.values.size() * config.methods.size() * static_cast<std::size_t>(config.trials) << " rows\n";
    const ChainMdpModel model = sweep_model(config);
    const ExactSolution optimal = exact_optimal(model);
    for (const int value : config.values) {
        const FeatureMapSpec spec = sweep_feature_spec(config, value, 0);
        const int m = config.axis == SweepAxis::sample_count ? value : config.samples;
        const SampleBatch batch = sample_batch(model, static_cast<std::size_t>(m), derive_seed(config.seed, 0));
        const LstdOperatorData op = assemble_operator(build_lstd_data(spec, batch, optimal.policy, model.gamma, model.n_states));
        std::cout << "sweep value " << value << " (trial 0): n=" << op.dim() << " rank=" << op.rank
                  << " lambda_min++=" << op.lambda_min_pp << " ||A||=" << op.spectral_norm_a << '\n';
        for (const auto method : config.methods) {
            for (const auto& s : config.grid_points(method)) print_step_report(std::cout, op, s);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse LSTD policy evaluation with the projective minimax concave penalty"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool timing = false;
    auto* chainwalk = app.add_subcommand("chainwalk", "Run a chain-walk sweep from a config file");
    chainwalk->add_option("--config", config_path, "Experiment config (key=value)")->required()->check(CLI::ExistingFile);
    chainwalk->add_option("--out", out, "Results CSV (overrides out=)");
    chainwalk->add_option("--seed", seed, "Base seed (overrides seed=)");
    chainwalk->add_option("--workers", workers, "Concurrent trials (overrides workers=)");
    chainwalk->add_flag("--timing", timing, "Record wall_time_ms (output is then not byte-reproducible)");

    SolveFlags flags;
    auto add_solver_flags = [&](CLI::App* cmd) {
        cmd->add_option("--method", flags.method, "pmc, l1, lstd or ridge");
        cmd->add_option("--mu", flags.mu, "Regularization weight");
        cmd->add_option("--tau", flags.tau, "PMC index, or 'auto' for the smallest admissible value");
        cmd->add_option("--q", flags.q, "Subspace dimension, or 'auto' for the Gram rank");
        cmd->add_option("--ridge", flags.ridge, "Ridge for the closed-form baseline");
        cmd->add_option("--max-iters", flags.max_iters, "Iteration cap");
        cmd->add_option("--tol", flags.tol, "Relative fixed-point residual tolerance");
    };
    auto* solve = app.add_subcommand("solve", "Run PMC-LSTD on a dataset dump");
    solve->add_option("--data", flags.data, "Dataset file ('m n gamma' header)")->required()->check(CLI::ExistingFile);
    solve->add_option("--out", flags.out, "Write weights here instead of stdout");
    add_solver_flags(solve);

    int states = 20;
    double gamma = 0.9;
    double success = 0.9;
    auto* exact = app.add_subcommand("exact", "Print V*, Q*, pi* of a chain model (reward sense)");
    exact->add_option("--states", states, "Number of chain states");
    exact->add_option("--gamma", gamma, "Discount factor");
    exact->add_option("--success", success, "Success probability of an action");

    std::string validate_config;
    std::string validate_data;
    auto* validate = app.add_subcommand("validate", "Check a config or dataset and report alpha, beta, eta");
    validate->add_option("--config", validate_config, "Experiment config")->check(CLI::ExistingFile);
    validate->add_option("--data", validate_data, "Dataset file, checked against the solver flags")->check(CLI::ExistingFile);
    add_solver_flags(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*chainwalk) return run_chainwalk(config_path, out, seed, workers, timing);
        if (*solve) return run_solve(flags);
        if (*exact) return run_exact(states, gamma, success);
        if (*validate) {
            if (validate_config.empty() == validate_data.empty()) {
                std::cerr << "error: validate needs exactly one of --config or --data\n";
                return 2;
            }
            return run_validate(validate_config, validate_data, flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
