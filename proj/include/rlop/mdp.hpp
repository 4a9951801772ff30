#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rlop {

class Rng;

// Row-sum / probability tolerance used by every simplex check.
inline constexpr double kSimplexTolerance = 1e-12;

/**
 * Finite MDP with tabular transition and reward tensors.
 *
 * transition[s][a][s'] is stored row-major (s major). Rewards are kept in
 * the per-transition form r(s,a,s'); the expected per-pair reward r(s,a) is
 * derived on demand (see reward_sa). gamma must lie in [0, 1).
 *
 * Values are immutable after construction by convention: every operation in
 * this library takes Mdp by const reference and never mutates it, so
 * instances can be shared freely across parallel workers.
 */
struct Mdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition; // size S*A*S
    std::vector<double> reward_sas; // size S*A*S
    double gamma = 0.0;

    std::size_t idx(int s, int a, int s2) const {
        return (static_cast<std::size_t>(s) * n_actions + a) * n_states + s2;
    }
    double p(int s, int a, int s2) const { return transition[idx(s, a, s2)]; }
    double r(int s, int a, int s2) const { return reward_sas[idx(s, a, s2)]; }
};

/** Stochastic policy: one probability row over actions per state. */
struct Policy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs; // size S*A, row-major

    double at(int s, int a) const {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }
    double& at(int s, int a) {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }

    static Policy uniform(int n_states, int n_actions);
    // One-hot rows; actions[s] is the selected action in state s.
    static Policy deterministic(int n_states, const std::vector<int>& actions,
                                int n_actions);

    bool operator==(const Policy&) const = default;
};

/**
 * Action-value table.
 *
 * Two storage kinds share one read/write contract:
 *  - dense: flat array, for DP-scale problems;
 *  - sparse: hash map keyed by state cell, for discretized environments
 *    whose full cell range cannot be allocated (e.g. 150^4 or 30^6 grids).
 *    Absent entries read as the configured default value.
 */
class QTable {
public:
    QTable() = default;

    static QTable dense(std::int64_t n_states, int n_actions, double fill = 0.0);
    static QTable sparse(std::int64_t n_states, int n_actions,
                         double default_value = 0.0);

    std::int64_t n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    bool is_sparse() const { return sparse_; }
    double default_value() const { return default_; }

    double at(std::int64_t s, int a) const;
    void set(std::int64_t s, int a, double value);

    double row_max(std::int64_t s) const;   // max_a q[s][a]
    int row_argmax(std::int64_t s) const;   // ties broken by lowest index

    // Number of state rows physically stored (sparse footprint; equals
    // n_states for dense tables).
    std::int64_t stored_states() const;

    // Dense-only direct access used by the DP hot loops.
    const std::vector<double>& dense_values() const { return dense_; }
    std::vector<double>& dense_values() { return dense_; }

private:
    std::int64_t n_states_ = 0;
    int n_actions_ = 0;
    bool sparse_ = false;
    double default_ = 0.0;
    std::vector<double> dense_;
    std::unordered_map<std::int64_t, std::vector<double>> rows_;
};

/** State-value table. */
struct VTable {
    std::vector<double> values;

    int n_states() const { return static_cast<int>(values.size()); }
    double at(int s) const { return values[static_cast<std::size_t>(s)]; }
    double& at(int s) { return values[static_cast<std::size_t>(s)]; }

    static VTable zeros(int n_states) { return VTable{std::vector<double>(n_states, 0.0)}; }
};

/** Diagnostic result of validate_mdp; empty iff the MDP is well formed. */
struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

// Lists every violated invariant: row sums off the simplex, probabilities
// outside [0,1], non-finite rewards, gamma outside [0,1), bad dimensions.
ValidationReport validate_mdp(const Mdp& m);

// Expected one-step reward r(s,a) = sum_{s'} P[s][a][s'] * r[s][a][s'].
double reward_sa(const Mdp& m, int s, int a);

// Deterministic greedy policy w.r.t. q; argmax ties go to the lowest index.
Policy greedy_policy(const QTable& q);

// v[s] = sum_a pi[s][a] * q[s][a].
VTable state_values_from_q(const QTable& q, const Policy& pi);

// A[s][a] = q[s][a] - sum_b pi[s][b] * q[s][b]; pi-weighted rows sum to 0.
QTable advantage(const QTable& q, const Policy& pi);

// Sup-norm distance over entries; shapes must match.
double sup_norm_distance(const QTable& f, const QTable& g);
double sup_norm_distance(const VTable& f, const VTable& g);

// Deterministic random instance generators (test plumbing). Transition rows
// are normalized uniform draws, rewards uniform in reward_range.
Mdp random_mdp(std::uint64_t seed, int n_states, int n_actions,
               std::pair<double, double> reward_range, double gamma = 0.9);
// Variant with zero self-transition mass everywhere (diagonal removed before
// normalization); on such MDPs the consistent operator coincides with the
// classical one.
Mdp random_mdp_without_self_transitions(std::uint64_t seed, int n_states,
                                        int n_actions,
                                        std::pair<double, double> reward_range,
                                        double gamma = 0.9);

Policy random_policy(Rng& rng, int n_states, int n_actions);
QTable random_qtable(Rng& rng, int n_states, int n_actions, double lo, double hi);
VTable random_vtable(Rng& rng, int n_states, double lo, double hi);

} // namespace rlop
