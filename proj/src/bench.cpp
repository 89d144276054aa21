#include "pmclstd/bench.hpp"

#include "pmclstd/features.hpp"
#include "pmclstd/rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace pmclstd {
namespace {

std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string& text, int line, const std::string& key) {
    T value{};
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError(line, "field '" + key + "': cannot parse '" + text + "' as a number");
    }
    return value;
}

bool parse_bool(const std::string& text, int line, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(line, "field '" + key + "': expected true or false, got '" + text + "'");
}

using Clock = std::chrono::steady_clock;

struct PointOutcome {
    double nmse = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    double wall_ms = 0.0;
    std::string hyperparams;
    bool valid = false;
    Vector weights;
};

// outcomes[method index][grid point]
using ItemOutcome = std::vector<std::vector<PointOutcome>>;

bool same_path(const EstimatorSettings& a, const EstimatorSettings& b) {
    return a.method == b.method && a.q == b.q && a.tau.has_value() == b.tau.has_value() &&
           (!a.tau || *a.tau == *b.tau);
}

}  // namespace

ConfigError::ConfigError(int line, const std::string& what)
    : std::invalid_argument("config line " + std::to_string(line) + ": " + what), line_(line) {}

double nmse(const Vector& v_star, const QTable& q_hat) {
    if (q_hat.rows() != v_star.size()) throw std::invalid_argument("nmse: V* and Q table disagree on state count");
    const double denom = v_star.squaredNorm();
    if (!(denom > 0.0)) throw std::invalid_argument("nmse: V* is identically zero");
    const Vector best = q_hat.rowwise().minCoeff();
    return (v_star - best).squaredNorm() / denom;
}

void ExperimentConfig::validate() const {
    if (values.empty()) throw std::invalid_argument("config: sweep values are empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0) throw std::invalid_argument("config: sweep values must be nonnegative");
        if (i > 0 && values[i] <= values[i - 1]) throw std::invalid_argument("config: sweep values must be strictly increasing");
    }
    if (axis == SweepAxis::sample_count && values.front() < 1) {
        throw std::invalid_argument("config: sample counts must be positive");
    }
    if (trials < 1) throw std::invalid_argument("config: trials must be at least 1");
    if (methods.empty()) throw std::invalid_argument("config: no methods enabled");
    if (samples < 1) throw std::invalid_argument("config: m must be positive");
    if (noise_count < 0 || n_rbf < 0) throw std::invalid_argument("config: feature counts must be nonnegative");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("config: gamma must lie in (0, 1)");
    if (mode == SweepMode::api && api_iterations < 1) throw std::invalid_argument("config: iterations must be positive");
    if (!(tolerance > 0.0) || max_iterations < 1) throw std::invalid_argument("config: invalid stopping rule");
    for (const auto m : methods) {
        if (m == Method::exact) throw std::invalid_argument("config: method 'exact' cannot be swept");
        if (grid_points(m).empty()) {
            throw std::invalid_argument("config: empty hyperparameter grid for method '" +
                                        std::string(method_name(m)) + "'");
        }
    }
}

std::vector<EstimatorSettings> ExperimentConfig::grid_points(Method method) const {
    const auto it = grids.find(method);
    const MethodGrid empty;
    const MethodGrid& grid = it == grids.end() ? empty : it->second;
    StopCriteria stop{tolerance, max_iterations};
    std::vector<EstimatorSettings> out;
    auto base = [&] {
        EstimatorSettings s;
        s.method = method;
        s.stop = stop;
        return s;
    };
    switch (method) {
        case Method::pmc: {
            const std::vector<std::optional<Eigen::Index>> qs = grid.q.empty() ? decltype(grid.q){std::nullopt} : grid.q;
            const std::vector<std::optional<double>> taus = grid.tau.empty() ? decltype(grid.tau){std::nullopt} : grid.tau;
            for (const auto& q : qs) {
                for (const auto& tau : taus) {
                    for (const double mu : grid.mu) {
                        auto s = base();
                        s.mu = mu;
                        s.tau = tau;
                        s.q = q;
                        out.push_back(s);
                    }
                }
            }
            break;
        }
        case Method::l1:
            for (const double mu : grid.mu) {
                auto s = base();
                s.mu = mu;
                out.push_back(s);
            }
            break;
        case Method::ridge:
            for (const double r : grid.ridge) {
                auto s = base();
                s.ridge = r;
                out.push_back(s);
            }
            break;
        case Method::lstd: out.push_back(base()); break;
        case Method::exact: break;
    }
    return out;
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string raw;
    int line = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key=value, got '" + text + "'");
        std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(line, "duplicate field '" + key + "'");

        // Grid keys may be scoped to one method: pmc.mu_grid=...
        std::optional<Method> scope;
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            try {
                scope = parse_method(key.substr(0, dot));
            } catch (const std::invalid_argument&) {
                throw ConfigError(line, "unknown method label '" + key.substr(0, dot) + "' in field '" + key + "'");
            }
            key = key.substr(dot + 1);
        }
        auto grids_for = [&]() {
            std::vector<MethodGrid*> out;
            if (scope) {
                out.push_back(&config.grids[*scope]);
            } else {
                for (const auto m : {Method::pmc, Method::l1, Method::ridge}) out.push_back(&config.grids[m]);
            }
            return out;
        };
        const bool scoped_ok = key == "mu_grid" || key == "tau_grid" || key == "q" || key == "q_grid" ||
                               key == "ridge_grid";
        if (scope && !scoped_ok) throw ConfigError(line, "field '" + key + "' cannot be scoped to a method");

        if (key == "sweep") {
            if (value == "noise_count") {
                config.axis = SweepAxis::noise_count;
            } else if (value == "sample_count") {
                config.axis = SweepAxis::sample_count;
            } else {
                throw ConfigError(line, "field 'sweep': expected noise_count or sample_count, got '" + value + "'");
            }
        } else if (key == "values") {
            config.values.clear();
            for (const auto& v : split_list(value)) config.values.push_back(parse_number<int>(v, line, key));
        } else if (key == "m") {
            config.samples = parse_number<int>(value, line, key);
        } else if (key == "noise") {
            config.noise_count = parse_number<int>(value, line, key);
        } else if (key == "trials") {
            config.trials = parse_number<int>(value, line, key);
        } else if (key == "methods") {
            config.methods.clear();
            for (const auto& v : split_list(value)) {
                try {
                    config.methods.push_back(parse_method(v));
                } catch (const std::invalid_argument&) {
                    throw ConfigError(line, "unknown method label '" + v + "'");
                }
            }
        } else if (key == "mu_grid") {
            for (auto* g : grids_for()) {
                g->mu.clear();
                for (const auto& v : split_list(value)) g->mu.push_back(parse_number<double>(v, line, key));
            }
        } else if (key == "tau_grid") {
            for (auto* g : grids_for()) {
                g->tau.clear();
                for (const auto& v : split_list(value)) {
                    if (v == "auto") {
                        g->tau.emplace_back(std::nullopt);
                    } else {
                        g->tau.emplace_back(parse_number<double>(v, line, key));
                    }
                }
            }
        } else if (key == "q" || key == "q_grid") {
            for (auto* g : grids_for()) {
                g->q.clear();
                for (const auto& v : split_list(value)) {
                    if (v == "auto") {
                        g->q.emplace_back(std::nullopt);
                    } else {
                        g->q.emplace_back(parse_number<long>(v, line, key));
                    }
                }
            }
        } else if (key == "ridge_grid") {
            for (auto* g : grids_for()) {
                g->ridge.clear();
                for (const auto& v : split_list(value)) g->ridge.push_back(parse_number<double>(v, line, key));
            }
        } else if (key == "mode") {
            if (value == "evaluate") {
                config.mode = SweepMode::evaluate;
            } else if (value == "api") {
                config.mode = SweepMode::api;
            } else {
                throw ConfigError(line, "field 'mode': expected evaluate or api, got '" + value + "'");
            }
        } else if (key == "iterations") {
            config.api_iterations = parse_number<int>(value, line, key);
        } else if (key == "n_rbf") {
            config.n_rbf = parse_number<int>(value, line, key);
        } else if (key == "n_states") {
            config.n_states = parse_number<int>(value, line, key);
        } else if (key == "success_prob") {
            config.success_prob = parse_number<double>(value, line, key);
        } else if (key == "gamma") {
            config.gamma = parse_number<double>(value, line, key);
        } else if (key == "seed") {
            config.seed = parse_number<std::uint64_t>(value, line, key);
        } else if (key == "tol") {
            config.tolerance = parse_number<double>(value, line, key);
        } else if (key == "max_iters") {
            config.max_iterations = parse_number<std::size_t>(value, line, key);
        } else if (key == "workers") {
            config.workers = parse_number<int>(value, line, key);
        } else if (key == "timing") {
            config.timing = parse_bool(value, line, key);
        } else if (key == "out") {
            config.output = value;
        } else if (key == "dump_weights") {
            config.dump_weights = value;
        } else {
            throw ConfigError(line, "unknown field '" + key + "'");
        }
    }
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line, e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    return parse_config(in);
}

ChainMdpModel sweep_model(const ExperimentConfig& config) {
    return ChainMdpModel::benchmark(config.n_states, config.success_prob, config.gamma);
}

FeatureMapSpec sweep_feature_spec(const ExperimentConfig& config, int sweep_value, int trial) {
    const int noise = config.axis == SweepAxis::noise_count ? sweep_value : config.noise_count;
    FeatureMapSpec spec = FeatureMapSpec::evenly_spaced(config.n_rbf, noise, config.n_states);
    spec.seed = derive_seed(config.seed + static_cast<std::uint64_t>(trial), 1);
    return spec;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    const ChainMdpModel model = sweep_model(config);
    const ExactSolution optimal = exact_optimal(model);
    const bool keep_weights = !config.dump_weights.empty();

    std::vector<std::vector<EstimatorSettings>> points;
    for (const auto m : config.methods) points.push_back(config.grid_points(m));

    const std::size_t n_values = config.values.size();
    const auto n_trials = static_cast<std::size_t>(config.trials);
    std::vector<ItemOutcome> outcomes(n_values * n_trials);

    auto run_item = [&](std::size_t item) {
        const std::size_t vi = item / n_trials;
        const int trial = static_cast<int>(item % n_trials);
        const int value = config.values[vi];
        const std::uint64_t trial_seed = config.seed + static_cast<std::uint64_t>(trial);
        const FeatureMapSpec spec = sweep_feature_spec(config, value, trial);
        const int m = config.axis == SweepAxis::sample_count ? value : config.samples;

        std::optional<LstdOperatorData> op;
        if (config.mode == SweepMode::evaluate) {
            const SampleBatch batch = sample_batch(model, static_cast<std::size_t>(m), derive_seed(trial_seed, 0));
            op = assemble_operator(build_lstd_data(spec, batch, optimal.policy, model.gamma, model.n_states));
        }

        ItemOutcome& out = outcomes[item];
        out.resize(points.size());
        for (std::size_t mi = 0; mi < points.size(); ++mi) {
            out[mi].resize(points[mi].size());
            const Vector* warm = nullptr;
            for (std::size_t pi = 0; pi < points[mi].size(); ++pi) {
                const EstimatorSettings& settings = points[mi][pi];
                PointOutcome& po = out[mi][pi];
                po.hyperparams = settings.describe();
                const auto start = Clock::now();
                try {
                    Vector weights;
                    if (config.mode == SweepMode::evaluate) {
                        if (pi == 0 || !same_path(points[mi][pi - 1], settings) || !out[mi][pi - 1].valid) warm = nullptr;
                        EstimatorFit fit = fit_weights(*op, settings, warm);
                        po.iterations = fit.iterations;
                        if (settings.method == Method::pmc) {
                            po.hyperparams = settings.describe(fit.tau, fit.q);
                        }
                        weights = std::move(fit.weights);
                    } else {
                        ApiConfig api;
                        api.estimator = settings;
                        api.samples = static_cast<std::size_t>(m);
                        api.iterations = static_cast<std::size_t>(config.api_iterations);
                        api.seed = trial_seed;
                        ApiResult run = approximate_policy_iteration(model, spec, api);
                        for (const auto it : run.solver_iterations) po.iterations += it;
                        weights = std::move(run.weights.back());
                    }
                    po.nmse = nmse(optimal.v, q_table(spec, weights, model.n_states));
                    po.valid = std::isfinite(po.nmse);
                    po.weights = std::move(weights);
                    warm = po.valid ? &po.weights : nullptr;
                } catch (const std::invalid_argument&) {
                    // Inadmissible grid point on this dataset (e.g. convexity condition).
                    po.valid = false;
                    warm = nullptr;
                } catch (const DivergenceError&) {
                    po.valid = false;
                    warm = nullptr;
                }
                po.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
            }
            if (!keep_weights) {
                // Warm starts are done; drop the vectors to bound memory.
                for (auto& po : out[mi]) po.weights = Vector();
            }
        }
    };

    const std::size_t total = outcomes.size();
    int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(total)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t item = next++; item < total; item = next++) {
            try {
                run_item(item);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    for (std::size_t vi = 0; vi < n_values; ++vi) {
        for (std::size_t mi = 0; mi < points.size(); ++mi) {
            const Method method = config.methods[mi];
            std::size_t best = points[mi].size();
            double best_mean = std::numeric_limits<double>::infinity();
            std::vector<GridSummary> summaries;
            for (std::size_t pi = 0; pi < points[mi].size(); ++pi) {
                double sum = 0.0;
                int valid = 0;
                for (std::size_t t = 0; t < n_trials; ++t) {
                    const auto& po = outcomes[vi * n_trials + t][mi][pi];
                    if (po.valid) {
                        sum += po.nmse;
                        ++valid;
                    }
                }
                GridSummary summary;
                summary.sweep_value = config.values[vi];
                summary.method = method;
                summary.hyperparams = points[mi][pi].describe();
                summary.valid_trials = valid;
                summary.mean_nmse = valid > 0 ? sum / valid : std::numeric_limits<double>::infinity();
                if (valid == config.trials && summary.mean_nmse < best_mean) {
                    best_mean = summary.mean_nmse;
                    best = pi;
                }
                summaries.push_back(std::move(summary));
            }
            if (best == points[mi].size()) {
                throw std::runtime_error("run_sweep: no grid point of method '" + std::string(method_name(method)) +
                                         "' is valid on every trial at sweep value " +
                                         std::to_string(config.values[vi]));
            }
            summaries[best].selected = true;
            for (auto& s : summaries) result.grid.push_back(std::move(s));
            for (std::size_t t = 0; t < n_trials; ++t) {
                auto& po = outcomes[vi * n_trials + t][mi][best];
                ResultRow row;
                row.sweep_value = config.values[vi];
                row.method = method;
                row.trial = static_cast<int>(t);
                row.nmse = po.nmse;
                row.iterations = po.iterations;
                row.wall_time_ms = config.timing ? po.wall_ms : 0.0;
                row.hyperparams = po.hyperparams;
                result.rows.push_back(row);
                if (keep_weights) result.weights.push_back({row.sweep_value, method, row.trial, std::move(po.weights)});
            }
        }
    }
    return result;
}

void write_results(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.sweep_value << ',' << method_name(r.method) << ',' << r.trial << ',' << shortest(r.nmse) << ','
            << r.iterations << ',';
        if (r.wall_time_ms == 0.0) {
            out << '0';
        } else {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, r.wall_time_ms, std::chars_format::fixed, 3);
            out.write(buf, res.ptr - buf);
        }
        out << ',' << r.hyperparams << '\n';
    }
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results to " + path.string());
    write_results(rows, out);
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

void write_grid_summary(const std::vector<GridSummary>& grid, std::ostream& out) {
    out << "sweep_value,method,hyperparams,mean_nmse,valid_trials,selected\n";
    for (const auto& g : grid) {
        out << g.sweep_value << ',' << method_name(g.method) << ',' << g.hyperparams << ',' << shortest(g.mean_nmse)
            << ',' << g.valid_trials << ',' << (g.selected ? 1 : 0) << '\n';
    }
}

void write_weight_dump(const std::vector<WeightDump>& dumps, std::ostream& out) {
    for (const auto& d : dumps) {
        out << d.sweep_value << ' ' << method_name(d.method) << ' ' << d.trial << ' ' << d.weights.size();
        for (const double w : d.weights) out << ' ' << shortest(w);
        out << '\n';
    }
}

std::vector<WeightDump> read_weight_dump(std::istream& in) {
    std::vector<WeightDump> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        WeightDump d;
        std::string method;
        Eigen::Index n = 0;
        if (!(fields >> d.sweep_value >> method >> d.trial >> n) || n < 0) {
            throw std::runtime_error("weight dump line " + std::to_string(line_no) + ": malformed header");
        }
        d.method = parse_method(method);
        d.weights.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::string tok;
            if (!(fields >> tok)) throw std::runtime_error("weight dump line " + std::to_string(line_no) + ": too few weights");
            d.weights(i) = parse_number<double>(tok, line_no, "weight");
        }
        out.push_back(std::move(d));
    }
    return out;
}

void write_sweep_outputs(const SweepResult& result, const ExperimentConfig& config) {
    if (config.output.empty()) throw std::runtime_error("no output path configured");
    const std::filesystem::path out(config.output);
    write_results(result.rows, out);
    std::ofstream grid(out.string() + ".grid.csv", std::ios::binary);
    if (!grid) throw std::runtime_error("cannot write grid summary next to " + out.string());
    write_grid_summary(result.grid, grid);
    if (!config.dump_weights.empty()) {
        std::ofstream dump(config.dump_weights, std::ios::binary);
        if (!dump) throw std::runtime_error("cannot write weight dump to " + config.dump_weights);
        write_weight_dump(result.weights, dump);
    }
}

void write_dataset(const LstdData& data, std::ostream& out) {
    data.validate();
    out << data.phi.rows() << ' ' << data.phi.cols() << ' ' << shortest(data.gamma) << '\n';
    for (Eigen::Index i = 0; i < data.phi.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.phi.cols(); ++j) out << shortest(data.phi(i, j)) << ' ';
        for (Eigen::Index j = 0; j < data.phi_next.cols(); ++j) out << shortest(data.phi_next(i, j)) << ' ';
        out << shortest(data.g(i)) << '\n';
    }
}

LstdData read_dataset(std::istream& in) {
    Eigen::Index m = 0;
    Eigen::Index n = 0;
    LstdData data;
    if (!(in >> m >> n >> data.gamma) || m < 1 || n < 1) {
        throw std::runtime_error("dataset: malformed header, expected 'm n gamma'");
    }
    data.phi.resize(m, n);
    data.phi_next.resize(m, n);
    data.g.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(in >> data.phi(i, j))) throw std::runtime_error("dataset: row " + std::to_string(i + 1) + " is short");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(in >> data.phi_next(i, j))) throw std::runtime_error("dataset: row " + std::to_string(i + 1) + " is short");
        }
        if (!(in >> data.g(i))) throw std::runtime_error("dataset: row " + std::to_string(i + 1) + " is short");
    }
    std::string extra;
    if (in >> extra) throw std::runtime_error("dataset: trailing data after " + std::to_string(m) + " rows");
    data.validate();
    return data;
}

std::map<std::pair<int, Method>, double> mean_nmse(const std::vector<ResultRow>& rows) {
    std::map<std::pair<int, Method>, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[{r.sweep_value, r.method}];
        slot.first += r.nmse;
        slot.second += 1;
    }
    std::map<std::pair<int, Method>, double> out;
    for (const auto& [key, sum] : acc) out[key] = sum.first / sum.second;
    return out;
}

}  // namespace pmclstd
