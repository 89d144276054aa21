#include "pmclstd/features.hpp"

#include "pmclstd/rng.hpp"

#include <stdexcept>
#include <string>

namespace pmclstd {
namespace {

void write_block(const FeatureMapSpec& spec, int state, Action action, Eigen::Ref<Vector> out) {
    const Eigen::Index offset = action == Action::left ? 0 : spec.half_dim();
    out(offset) = 1.0;
    for (int i = 0; i < spec.n_rbf(); ++i) {
        const double d = static_cast<double>(state) - spec.centers[i];
        out(offset + 1 + i) = std::exp(-d * d / spec.width);
    }
}

void write_noise(const FeatureMapSpec& spec, Action action, Rng& rng, Eigen::Ref<Vector> out) {
    if (spec.n_noise == 0 || spec.noise_std == 0.0) return;
    const Eigen::Index offset = (action == Action::left ? 0 : spec.half_dim()) + 1 + spec.n_rbf();
    for (int i = 0; i < spec.n_noise; ++i) out(offset + i) = spec.noise_std * rng.normal();
}

}  // namespace

FeatureMapSpec FeatureMapSpec::evenly_spaced(int n_rbf, int n_noise, int n_states) {
    if (n_rbf < 0 || n_noise < 0) throw std::invalid_argument("feature counts must be nonnegative");
    if (n_states < 1) throw std::invalid_argument("feature map needs at least one state");
    FeatureMapSpec spec;
    spec.n_noise = n_noise;
    const double lo = 1.0;
    const double hi = static_cast<double>(n_states);
    double spacing = hi - lo;
    if (n_rbf == 1) {
        spec.centers = {(lo + hi) / 2.0};
        spacing = (hi - lo) / 2.0;
    } else {
        for (int i = 0; i < n_rbf; ++i) spec.centers.push_back(lo + (hi - lo) * i / (n_rbf - 1));
        if (n_rbf > 1) spacing = (hi - lo) / (n_rbf - 1);
    }
    // exp(-spacing^2 / width) = 1/2 between neighbours.
    spec.width = spacing > 0.0 ? spacing * spacing / std::log(2.0) : 1.0;
    return spec;
}

Vector evaluate_features(const FeatureMapSpec& spec, int state, Action action, const Vector& noise_draw) {
    if (noise_draw.size() != spec.n_noise) {
        throw std::invalid_argument("evaluate_features: noise draw has length " + std::to_string(noise_draw.size()) +
                                    ", expected " + std::to_string(spec.n_noise));
    }
    Vector out = Vector::Zero(spec.dim());
    write_block(spec, state, action, out);
    const Eigen::Index offset = (action == Action::left ? 0 : spec.half_dim()) + 1 + spec.n_rbf();
    out.segment(offset, spec.n_noise) = noise_draw;
    return out;
}

Vector mean_features(const FeatureMapSpec& spec, int state, Action action) {
    Vector out = Vector::Zero(spec.dim());
    write_block(spec, state, action, out);
    return out;
}

QTable q_table(const FeatureMapSpec& spec, const Vector& w, int n_states) {
    if (w.size() != spec.dim()) throw std::invalid_argument("q_table: weight dimension mismatch");
    QTable q(n_states, kActionCount);
    for (int s = 1; s <= n_states; ++s) {
        for (int a = 0; a < kActionCount; ++a) q(s - 1, a) = w.dot(mean_features(spec, s, static_cast<Action>(a)));
    }
    return q;
}

LstdData build_lstd_data(const FeatureMapSpec& spec, const SampleBatch& batch, const Policy& policy, double gamma,
                         int n_states) {
    const auto m = static_cast<Eigen::Index>(batch.size());
    if (m == 0) throw std::invalid_argument("build_lstd_data: empty batch");
    if (static_cast<int>(policy.size()) != n_states) {
        throw std::invalid_argument("build_lstd_data: policy must cover every state");
    }
    if (batch.actions.size() != batch.size() || batch.payoffs.size() != batch.size() ||
        batch.next_states.size() != batch.size()) {
        throw std::invalid_argument("build_lstd_data: ragged sample batch");
    }

    LstdData data;
    data.gamma = gamma;
    data.phi = Matrix::Zero(m, spec.dim());
    data.phi_next = Matrix::Zero(m, spec.dim());
    data.g.resize(m);
    Vector row(spec.dim());
    for (Eigen::Index i = 0; i < m; ++i) {
        const int s = batch.states[i];
        const int next = batch.next_states[i];
        if (s < 1 || s > n_states || next < 1 || next > n_states) {
            throw std::out_of_range("build_lstd_data: sample " + std::to_string(i) + " has a state outside 1.." +
                                    std::to_string(n_states));
        }
        const Action next_action = policy[next - 1];

        row.setZero();
        write_block(spec, s, batch.actions[i], row);
        Rng current(derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i)));
        write_noise(spec, batch.actions[i], current, row);
        data.phi.row(i) = row.transpose();

        row.setZero();
        write_block(spec, next, next_action, row);
        Rng successor(derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i) + 1));
        write_noise(spec, next_action, successor, row);
        data.phi_next.row(i) = row.transpose();

        data.g(i) = batch.payoffs[i];
    }
    return data;
}

}  // namespace pmclstd
