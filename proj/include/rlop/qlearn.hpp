#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rlop/envs.hpp"
#include "rlop/mdp.hpp"
#include "rlop/operators.hpp"

namespace rlop {

class Rng;

// Which sampled operator supplies the TD target.
enum class UpdateVariant { classical, consistent, advantage };

const char* to_string(UpdateVariant variant);
std::optional<UpdateVariant> variant_from_string(std::string_view name);

struct AgentConfig {
    double alpha = 0.1;    // learning rate, (0, 1]
    double epsilon = 0.1;  // exploration rate, [0, 1]
    double gamma = 0.99;   // discount, [0, 1)
    UpdateVariant variant = UpdateVariant::classical;
    BetaSchedule beta = BetaSchedule::geometric(0.99, 0.999); // advantage only
    std::int64_t episode_cap = 10000; // fixed episode window length
    std::int64_t step_cap = 10000;    // total steps per run
    double initial_q = 0.0;           // sparse-table default (optimism knob)
    // Optional per-episode multiplicative decay; 1.0 keeps the rates fixed.
    double epsilon_decay = 1.0;
    double alpha_decay = 1.0;
};

void validate(const AgentConfig& config);

/**
 * One training run.
 *
 * The run is partitioned into fixed windows of episode_cap steps. A fresh
 * episode starts at each window; if it terminates early the remaining window
 * steps repeat the last total ("padding") and no training happens during
 * them. cumulative_reward[t] is the running sum of rewards over the whole
 * run (never reset across episodes) and always has length step_cap.
 */
struct RunRecord {
    std::uint64_t seed = 0;
    std::vector<double> cumulative_reward;
    std::int64_t episodes = 0;
    std::vector<std::int64_t> episode_steps;   // acting steps per episode
    std::vector<bool> episode_reached_goal;    // terminated (vs window-cut)
    std::int64_t q_updates = 0;
};

struct TrainResult {
    RunRecord record;
    QTable q;
};

// Sampled one-step target for each variant:
//   classical:  r + gamma * max_a' q[s'][a']                    (r if terminal)
//   consistent: classical, except a same-cell transition bootstraps from
//               q[s][a] instead of the max                      (r if terminal)
//   advantage:  classical + beta_j * (q[s][a] - max_b q[s][b])
// The advantage term instantiates the operator's policy with the greedy one,
// the policy Q-learning itself evaluates.
double td_target(UpdateVariant variant, const QTable& q, std::int64_t s_cell, int a,
                 double reward, std::int64_t next_cell, bool terminated,
                 double beta_j, double gamma);

// q[s][a] <- (1 - alpha) * q[s][a] + alpha * target; returns the new entry.
double q_update(QTable& q, std::int64_t s_cell, int a, double target, double alpha);

// Epsilon-greedy: uniform random action with probability epsilon, otherwise
// greedy with lowest-index tie-break. One uniform draw happens every call.
int select_action(const QTable& q, std::int64_t s_cell, double epsilon, Rng& rng);

// Runs tabular Q-learning on the discretized environment until step_cap
// global steps. Deterministic for a fixed seed. The advantage schedule index
// advances once per Q-update.
TrainResult run_training(EnvKind env, const GridSpec& grid, const AgentConfig& config,
                         std::uint64_t seed);

} // namespace rlop
