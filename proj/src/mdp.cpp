#include "pmclstd/mdp.hpp"

#include "pmclstd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pmclstd {
namespace {

int clamp_state(int s, int n) { return s < 1 ? 1 : (s > n ? n : s); }

void require_state(int state, const ChainMdpModel& model) {
    if (state < 1 || state > model.n_states) {
        throw std::out_of_range("state " + std::to_string(state) + " outside 1.." + std::to_string(model.n_states));
    }
}

void require_policy(const Policy& policy, const ChainMdpModel& model) {
    if (static_cast<int>(policy.size()) != model.n_states) {
        throw std::invalid_argument("policy must assign an action to each of the " + std::to_string(model.n_states) +
                                    " states");
    }
}

Eigen::Index sa_index(int state, Action a) { return 2 * (state - 1) + static_cast<Eigen::Index>(a); }

}  // namespace

std::string_view action_name(Action a) { return a == Action::left ? "left" : "right"; }

Action parse_action(std::string_view name) {
    if (name == "left") return Action::left;
    if (name == "right") return Action::right;
    throw std::invalid_argument("unknown action label '" + std::string(name) + "'");
}

ChainMdpModel ChainMdpModel::benchmark(int n_states, double success_prob, double gamma) {
    ChainMdpModel model;
    model.n_states = n_states;
    model.success_prob = success_prob;
    model.gamma = gamma;
    model.payoff = QTable::Zero(n_states, kActionCount);
    model.payoff.row(0).setConstant(-1.0);
    model.payoff.row(n_states - 1).setConstant(-1.0);
    model.validate();
    return model;
}

void ChainMdpModel::validate() const {
    if (n_states < 1) throw std::invalid_argument("chain model needs at least one state");
    if (!(success_prob >= 0.0 && success_prob <= 1.0)) {
        throw std::invalid_argument("success probability must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (payoff.rows() != n_states || payoff.cols() != kActionCount) {
        throw std::invalid_argument("payoff table must be n_states x 2");
    }
}

Vector chain_transition(int state, Action action, const ChainMdpModel& model) {
    require_state(state, model);
    const int dir = action == Action::left ? -1 : 1;
    Vector dist = Vector::Zero(model.n_states);
    dist(clamp_state(state + dir, model.n_states) - 1) += model.success_prob;
    dist(clamp_state(state - dir, model.n_states) - 1) += 1.0 - model.success_prob;
    return dist;
}

QTable bellman_policy(const ChainMdpModel& model, const QTable& q, const Policy& policy) {
    require_policy(policy, model);
    Vector next_value(model.n_states);
    for (int s = 1; s <= model.n_states; ++s) next_value(s - 1) = q(s - 1, static_cast<Eigen::Index>(policy[s - 1]));
    QTable out(model.n_states, kActionCount);
    for (int s = 1; s <= model.n_states; ++s) {
        for (int a = 0; a < kActionCount; ++a) {
            const Vector p = chain_transition(s, static_cast<Action>(a), model);
            out(s - 1, a) = model.payoff(s - 1, a) + model.gamma * p.dot(next_value);
        }
    }
    return out;
}

QTable bellman_optimal(const ChainMdpModel& model, const QTable& q) {
    return bellman_policy(model, q, greedy_policy(q));
}

Policy greedy_policy(const QTable& q) {
    Policy policy(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        policy[s] = q(s, 1) < q(s, 0) ? Action::right : Action::left;
    }
    return policy;
}

ExactSolution exact_q_policy(const ChainMdpModel& model, const Policy& policy) {
    model.validate();
    require_policy(policy, model);
    const Eigen::Index size = 2 * model.n_states;
    Matrix system = Matrix::Identity(size, size);
    Vector rhs(size);
    for (int s = 1; s <= model.n_states; ++s) {
        for (int a = 0; a < kActionCount; ++a) {
            const auto action = static_cast<Action>(a);
            const auto row = sa_index(s, action);
            rhs(row) = model.payoff(s - 1, a);
            const Vector p = chain_transition(s, action, model);
            for (int t = 1; t <= model.n_states; ++t) {
                if (p(t - 1) != 0.0) system(row, sa_index(t, policy[t - 1])) -= model.gamma * p(t - 1);
            }
        }
    }
    const Eigen::PartialPivLU<Matrix> lu(system);
    const Vector flat = lu.solve(rhs);
    if (!flat.allFinite()) throw std::runtime_error("exact_q_policy: singular Bellman system");

    ExactSolution out;
    out.q.resize(model.n_states, kActionCount);
    out.v.resize(model.n_states);
    out.policy = policy;
    for (int s = 1; s <= model.n_states; ++s) {
        out.q(s - 1, 0) = flat(sa_index(s, Action::left));
        out.q(s - 1, 1) = flat(sa_index(s, Action::right));
        out.v(s - 1) = out.q(s - 1, static_cast<Eigen::Index>(policy[s - 1]));
    }
    return out;
}

ExactSolution exact_optimal(const ChainMdpModel& model) {
    Policy policy(static_cast<std::size_t>(model.n_states), Action::left);
    while (true) {
        ExactSolution sol = exact_q_policy(model, policy);
        // Switch only on strict improvement so that the iteration terminates.
        bool changed = false;
        for (int s = 0; s < model.n_states; ++s) {
            const auto cur = static_cast<Eigen::Index>(policy[s]);
            const auto alt = 1 - cur;
            if (sol.q(s, alt) < sol.q(s, cur) - 1e-12 * (1.0 + std::abs(sol.q(s, cur)))) {
                policy[s] = static_cast<Action>(alt);
                changed = true;
            }
        }
        if (!changed) {
            sol.v = sol.q.rowwise().minCoeff();
            sol.policy = greedy_policy(sol.q);
            return sol;
        }
    }
}

SampleBatch sample_batch(const ChainMdpModel& model, std::size_t m, std::uint64_t seed) {
    model.validate();
    if (m == 0) throw std::invalid_argument("sample_batch: m must be at least 1");
    Rng rng(seed);
    SampleBatch batch;
    batch.rng_seed = seed;
    batch.states.reserve(m);
    batch.actions.reserve(m);
    batch.payoffs.reserve(m);
    batch.next_states.reserve(m);
    const auto pairs = static_cast<std::uint64_t>(model.n_states) * kActionCount;
    for (std::size_t i = 0; i < m; ++i) {
        const auto pick = rng.below(pairs);
        const int s = static_cast<int>(pick / kActionCount) + 1;
        const auto a = static_cast<Action>(pick % kActionCount);
        const int dir = a == Action::left ? -1 : 1;
        const bool success = rng.uniform() < model.success_prob;
        const int next = clamp_state(success ? s + dir : s - dir, model.n_states);
        batch.states.push_back(s);
        batch.actions.push_back(a);
        batch.payoffs.push_back(model.payoff(s - 1, static_cast<Eigen::Index>(a)));
        batch.next_states.push_back(next);
    }
    return batch;
}

}  // namespace pmclstd
