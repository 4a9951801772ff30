#include "rlop/qlearn.hpp"

#include <cmath>
#include <stdexcept>

#include "rlop/rng.hpp"

namespace rlop {

const char* to_string(UpdateVariant variant) {
    switch (variant) {
    case UpdateVariant::classical: return "classical";
    case UpdateVariant::consistent: return "consistent";
    case UpdateVariant::advantage: return "advantage";
    }
    return "?";
}

std::optional<UpdateVariant> variant_from_string(std::string_view name) {
    if (name == "classical") return UpdateVariant::classical;
    if (name == "consistent") return UpdateVariant::consistent;
    if (name == "advantage") return UpdateVariant::advantage;
    return std::nullopt;
}

void validate(const AgentConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0,1]");
    if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in [0,1]");
    if (!(config.gamma >= 0.0 && config.gamma < 1.0))
        throw std::invalid_argument("gamma must lie in [0,1)");
    if (config.episode_cap < 1) throw std::invalid_argument("episode_cap must be >= 1");
    if (config.step_cap < 1) throw std::invalid_argument("step_cap must be >= 1");
    if (!std::isfinite(config.initial_q))
        throw std::invalid_argument("initial_q must be finite");
    if (!(config.epsilon_decay > 0.0 && config.epsilon_decay <= 1.0))
        throw std::invalid_argument("epsilon_decay must lie in (0,1]");
    if (!(config.alpha_decay > 0.0 && config.alpha_decay <= 1.0))
        throw std::invalid_argument("alpha_decay must lie in (0,1]");
}

double td_target(UpdateVariant variant, const QTable& q, std::int64_t s_cell, int a,
                 double reward, std::int64_t next_cell, bool terminated,
                 double beta_j, double gamma) {
    if (terminated) return reward; // no bootstrapping, no advantage term
    double target = reward;
    if (variant == UpdateVariant::consistent && next_cell == s_cell)
        target += gamma * q.at(s_cell, a);
    else
        target += gamma * q.row_max(next_cell);
    if (variant == UpdateVariant::advantage && beta_j != 0.0)
        target += beta_j * (q.at(s_cell, a) - q.row_max(s_cell));
    return target;
}

double q_update(QTable& q, std::int64_t s_cell, int a, double target, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0,1]");
    const double updated = (1.0 - alpha) * q.at(s_cell, a) + alpha * target;
    q.set(s_cell, a, updated);
    return updated;
}

int select_action(const QTable& q, std::int64_t s_cell, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in [0,1]");
    const double draw = rng.uniform();
    if (draw < epsilon) return rng.uniform_int(0, q.n_actions() - 1);
    return q.row_argmax(s_cell);
}

TrainResult run_training(EnvKind env, const GridSpec& grid, const AgentConfig& config,
                         std::uint64_t seed) {
    validate(config);
    if (grid.dims() != env_state_dim(env))
        throw std::invalid_argument("grid does not match the environment");

    Rng rng(seed);
    TrainResult result;
    result.q = QTable::sparse(grid.n_cells(), env_n_actions(env), config.initial_q);
    RunRecord& record = result.record;
    record.seed = seed;
    record.cumulative_reward.reserve(static_cast<std::size_t>(config.step_cap));

    double epsilon = config.epsilon;
    double alpha = config.alpha;
    double total = 0.0;
    std::int64_t beta_index = 0;
    std::int64_t t = 0;

    while (t < config.step_cap) {
        const std::int64_t window_end = std::min(t + config.episode_cap, config.step_cap);
        ContinuousState state = env_initial_state(env, rng);
        std::int64_t cell = discretize(state, grid);
        std::int64_t acting_steps = 0;
        bool terminated = false;

        while (t < window_end && !terminated) {
            const int action = select_action(result.q, cell, epsilon, rng);
            const StepOutcome outcome = env_step(env, state, action);
            const std::int64_t next_cell = discretize(outcome.next_state, grid);

            const double beta_j = config.variant == UpdateVariant::advantage
                                      ? config.beta.at(beta_index)
                                      : 0.0;
            const double target =
                td_target(config.variant, result.q, cell, action, outcome.reward,
                          next_cell, outcome.terminated, beta_j, config.gamma);
            q_update(result.q, cell, action, target, alpha);
            ++beta_index;
            ++record.q_updates;

            total += outcome.reward;
            record.cumulative_reward.push_back(total);
            ++t;
            ++acting_steps;
            state = outcome.next_state;
            cell = next_cell;
            terminated = outcome.terminated;
        }

        // Early termination pads the remaining window steps with the last
        // total; no interaction or training happens during padding.
        while (t < window_end) {
            record.cumulative_reward.push_back(total);
            ++t;
        }

        ++record.episodes;
        record.episode_steps.push_back(acting_steps);
        record.episode_reached_goal.push_back(terminated);
        epsilon *= config.epsilon_decay;
        alpha *= config.alpha_decay;
    }
    return result;
}

} // namespace rlop
