#pragma once

#include "pmclstd/lstd.hpp"
#include "pmclstd/mdp.hpp"
#include "pmclstd/policy_iteration.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmclstd {

/// Sum_s [V*(s) - min_a Q(s, a)]^2 / Sum_s V*(s)^2.
double nmse(const Vector& v_star, const QTable& q_hat);

enum class SweepAxis { noise_count, sample_count };
enum class SweepMode { evaluate, api };

/// Hyperparameter grid of one method. Empty optionals in tau/q mean "auto".
struct MethodGrid {
    std::vector<double> mu;
    std::vector<std::optional<double>> tau;
    std::vector<std::optional<Eigen::Index>> q;
    std::vector<double> ridge;
};

struct ExperimentConfig {
    SweepAxis axis = SweepAxis::noise_count;
    std::vector<int> values;
    int samples = 1000;      // fixed m for noise sweeps
    int noise_count = 1000;  // fixed n_noise for sample sweeps
    int trials = 30;
    std::vector<Method> methods;
    std::map<Method, MethodGrid> grids;
    SweepMode mode = SweepMode::evaluate;
    int api_iterations = 10;
    int n_rbf = 10;
    int n_states = 20;
    double success_prob = 0.9;
    double gamma = 0.9;
    std::uint64_t seed = 12345;
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    int workers = 0;      // 0: hardware concurrency
    bool timing = false;  // wall_time_ms is written as 0 unless enabled
    std::string output;
    std::string dump_weights;

    /// Throws std::invalid_argument on the first violated invariant.
    void validate() const;
    std::vector<EstimatorSettings> grid_points(Method method) const;
};

/// Parse error carrying the offending line.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
    int sweep_value = 0;
    Method method = Method::lstd;
    int trial = 0;
    double nmse = 0.0;
    std::size_t iterations = 0;
    double wall_time_ms = 0.0;
    std::string hyperparams;
};

struct GridSummary {
    int sweep_value = 0;
    Method method = Method::lstd;
    std::string hyperparams;
    double mean_nmse = 0.0;
    int valid_trials = 0;
    bool selected = false;
};

struct WeightDump {
    int sweep_value = 0;
    Method method = Method::lstd;
    int trial = 0;
    Vector weights;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<GridSummary> grid;
    std::vector<WeightDump> weights;
};

inline constexpr const char* kResultsHeader = "sweep_value,method,trial,nmse,iterations,wall_time_ms,hyperparams";

SweepResult run_sweep(const ExperimentConfig& config);

/// Feature map and model used for (sweep value, trial); shared with the dump checker.
FeatureMapSpec sweep_feature_spec(const ExperimentConfig& config, int sweep_value, int trial);
ChainMdpModel sweep_model(const ExperimentConfig& config);

void write_results(const std::vector<ResultRow>& rows, std::ostream& out);
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void write_grid_summary(const std::vector<GridSummary>& grid, std::ostream& out);
void write_weight_dump(const std::vector<WeightDump>& dumps, std::ostream& out);
std::vector<WeightDump> read_weight_dump(std::istream& in);
/// Writes the rows, the grid summary (<out>.grid.csv) and the optional weight dump.
void write_sweep_outputs(const SweepResult& result, const ExperimentConfig& config);

/// Text dataset: header "m n gamma", then m lines of Phi row, Phi' row, g.
void write_dataset(const LstdData& data, std::ostream& out);
LstdData read_dataset(std::istream& in);

/// Mean NMSE per (sweep value, method) over the selected rows.
std::map<std::pair<int, Method>, double> mean_nmse(const std::vector<ResultRow>& rows);

}  // namespace pmclstd
