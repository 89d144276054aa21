#pragma once

#include "pmclstd/linalg.hpp"
#include "pmclstd/lstd.hpp"
#include "pmclstd/mdp.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace pmclstd {

/// phi(s, a) = [varphi(s), noise, 0] for left and [0, varphi(s), noise] for
/// right, with varphi(s) = [1, exp(-(s - c_1)^2 / width), ...].
struct FeatureMapSpec {
    std::vector<double> centers;
    double width = 1.0;
    int n_noise = 0;
    double noise_std = std::sqrt(0.1);
    std::uint64_t seed = 0;

    /// `n_rbf` centers evenly spaced over [1, n_states]; adjacent kernels meet at 0.5.
    static FeatureMapSpec evenly_spaced(int n_rbf, int n_noise, int n_states = 20);

    int n_rbf() const { return static_cast<int>(centers.size()); }
    /// Length of one action block, 1 + n_rbf + n_noise.
    Eigen::Index half_dim() const { return 1 + n_rbf() + n_noise; }
    Eigen::Index dim() const { return 2 * half_dim(); }
};

Vector evaluate_features(const FeatureMapSpec& spec, int state, Action action, const Vector& noise_draw);

/// Features with the noise block at its mean (zero).
Vector mean_features(const FeatureMapSpec& spec, int state, Action action);

/// Q(s, a) = w^T phi(s, a) with noise at its mean, for states 1..n_states.
QTable q_table(const FeatureMapSpec& spec, const Vector& w, int n_states);

/// Rows phi(s_i, a_i) and phi(s'_i, pi(s'_i)); every row gets an independent
/// N(0, noise_std^2 I) draw seeded from (spec.seed, row, matrix).
LstdData build_lstd_data(const FeatureMapSpec& spec, const SampleBatch& batch, const Policy& policy, double gamma,
                         int n_states = 20);

}  // namespace pmclstd
