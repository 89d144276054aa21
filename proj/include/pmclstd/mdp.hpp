#pragma once

#include "pmclstd/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pmclstd {

enum class Action : std::uint8_t { left = 0, right = 1 };

inline constexpr int kActionCount = 2;

std::string_view action_name(Action a);
/// Parses "left" / "right"; throws std::invalid_argument otherwise.
Action parse_action(std::string_view name);

/// Deterministic stationary policy; entry s-1 is the action in state s.
using Policy = std::vector<Action>;

/// Tables indexed by (state - 1, action).
using QTable = Matrix;

/// Chain walk: states 1..n, actions move one step left or right and succeed
/// with `success_prob`, otherwise move the opposite way. Moves past either
/// end keep the agent at the boundary. Payoffs are costs (negated rewards),
/// and every solver minimizes.
struct ChainMdpModel {
    int n_states = 20;
    double success_prob = 0.9;
    QTable payoff;
    double gamma = 0.9;

    /// Reward 1 at both end states, zero elsewhere (cost -1 / 0).
    static ChainMdpModel benchmark(int n_states = 20, double success_prob = 0.9, double gamma = 0.9);

    void validate() const;
};

/// Distribution over next states (entry s'-1), supported on at most two states.
Vector chain_transition(int state, Action action, const ChainMdpModel& model);

struct ExactSolution {
    QTable q;
    Vector v;
    Policy policy;
};

/// Q^pi from Q = g + gamma P_pi Q; V^pi(s) = Q(s, pi(s)).
ExactSolution exact_q_policy(const ChainMdpModel& model, const Policy& policy);

/// Exact policy iteration from the all-left policy until the greedy policy is stable.
ExactSolution exact_optimal(const ChainMdpModel& model);

/// (T_pi Q)(s, a) = g(s, a) + gamma E[Q(s', pi(s'))].
QTable bellman_policy(const ChainMdpModel& model, const QTable& q, const Policy& policy);

/// (T_* Q)(s, a) = g(s, a) + gamma E[min_a' Q(s', a')].
QTable bellman_optimal(const ChainMdpModel& model, const QTable& q);

/// Per state, the cost-minimizing action; ties go to `left`.
Policy greedy_policy(const QTable& q);

struct SampleBatch {
    std::vector<int> states;
    std::vector<Action> actions;
    std::vector<double> payoffs;
    std::vector<int> next_states;
    std::uint64_t rng_seed = 0;

    std::size_t size() const { return states.size(); }
};

/// m i.i.d. transitions with (s, a) uniform over states x actions.
SampleBatch sample_batch(const ChainMdpModel& model, std::size_t m, std::uint64_t seed);

}  // namespace pmclstd
