#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlop/dp.hpp"
#include "rlop/operators.hpp"

namespace rlop {

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict verdict);

/**
 * A replayable counterexample. Instances are derived deterministically from
 * (master seed, trial index), so the stored seed regenerates the exact MDP,
 * policy and tables; they are also stored inline for inspection. lhs/rhs are
 * the two sides of the violated inequality.
 */
struct Witness {
    std::uint64_t trial = 0;
    std::uint64_t instance_seed = 0;
    double gamma = 0.0;
    double beta = 0.0;
    Mdp mdp;
    std::optional<Policy> policy;
    std::vector<double> u, v; // flattened tables (q or v layout)
    int s = -1, a = -1;       // offending entry for entrywise properties
    double lhs = 0.0, rhs = 0.0;
    std::string detail;
};

struct PropertyReport {
    std::string property;
    std::uint64_t trials = 0;
    std::uint64_t inconclusive_count = 0;
    std::vector<Witness> violations;
    Verdict verdict = Verdict::pass;

    bool passed() const { return verdict == Verdict::pass; }
};

// Randomized-instance envelope shared by the trial-based checks. Brute-force
// oracles stay exact and fast under these caps.
struct TrialLimits {
    int max_states = 10;
    int max_actions = 4;
    double value_range = 100.0; // table entries drawn uniform in +-range
    double gamma_lo = 0.1;
    double gamma_hi = 0.95;
};

// sup||T u - T v|| <= gamma * sup||u - v|| + 1e-10 over random instances.
PropertyReport check_contraction(OperatorTag op, std::uint64_t trials,
                                 std::uint64_t seed, TrialLimits limits = {});

// u <= v entrywise implies T u <= T v entrywise (tolerance 1e-12); v is u
// plus a nonnegative random perturbation.
PropertyReport check_monotonicity(OperatorTag op, std::uint64_t trials,
                                  std::uint64_t seed, TrialLimits limits = {});

// Searches for (MDP, pi, u, v) with sup||T_a u - T_a v|| > gamma * sup||u - v||.
// Finding one is reported as verdict pass with the witness attached (the
// operator is expected not to contract for beta > 0); finding none is
// reported, not an error. All instances use the given fixed gamma.
PropertyReport find_noncontraction_witness(double beta, double gamma,
                                           std::uint64_t trials, std::uint64_t seed,
                                           TrialLimits limits = {});

// Recomputes (lhs, rhs) for a stored witness of the three checks above.
std::pair<double, double> replay_witness(const Witness& w, OperatorTag op);

/**
 * Paired-iteration surrogate for the asymptotic well-behaviour definitions.
 * Classical sequence: Q <- T* Q. Alternative sequence: Q <- T_a Q with
 * pi = greedy w.r.t. the current Q and beta_k from the schedule. "Limit"
 * means iterate k_max, accepted only if both final residuals fall below
 * residual_gate; otherwise the verdict is inconclusive (never a failure).
 */
struct PairedIterationOptions {
    std::int64_t k_max = 40000;
    double residual_gate = 1e-8;
    double suboptimal_margin = 1e-6; // classification margin for Q < V
    double gap_tolerance = 1e-8;
};

// Wherever the classical limit has Q < V - margin, the alternative limit
// must also have Q < V.
PropertyReport check_optimality_preservation(const Mdp& m, const BetaSchedule& schedule,
                                             PairedIterationOptions opt = {});

// |Q - V| under the classical limit must not exceed the alternative's gap
// by more than gap_tolerance, entrywise.
PropertyReport check_gap_increasing(const Mdp& m, const BetaSchedule& schedule,
                                    PairedIterationOptions opt = {});

/** Empirical comparison of the consistent and classical fixed points. */
struct GapSummary {
    double sup_norm_gap = 0.0;
    double greedy_agreement = 0.0; // fraction of states with equal greedy action
    bool greedy_identical = false;
    bool both_converged = false;
    QTable consistent_fp;
    QTable classical_fp;
};

GapSummary consistent_vs_classical_gap(const Mdp& m, double tol = 1e-10);

// Report serialization for the CLI (json).
void write_report_json(const PropertyReport& report, const std::string& path);

} // namespace rlop
