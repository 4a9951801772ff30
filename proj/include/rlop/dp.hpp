#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlop/operators.hpp"

namespace rlop {

/**
 * Per-iteration convergence record of a fixed-point run.
 *
 * steps[n-1] describes iterate n (n >= 1): the residual ||f_n - f_{n-1}||_inf
 * and the distance ||f_n - f_final||_inf. Distances are computed after the
 * run by replaying the deterministic iteration, using the final iterate as a
 * proxy for the true fixed point; with tight tolerances the proxy error is
 * bounded by gamma * tol / (1 - gamma).
 */
struct IterationTrace {
    struct Step {
        std::int64_t iter;     // 1-based iteration index
        double residual;       // ||f_n - f_{n-1}||_inf
        double dist_to_final;  // ||f_n - f_final||_inf
    };
    enum class Termination { converged, max_iters };

    std::vector<Step> steps;
    double initial_distance = 0.0; // ||f_0 - f_final||_inf
    Termination reason = Termination::max_iters;

    bool converged() const { return reason == Termination::converged; }
};

struct FixedPointOptions {
    double tol = 1e-10;
    std::int64_t max_iters = 100000;
};

struct QSolve {
    QTable table;
    IterationTrace trace;
    bool converged() const { return trace.converged(); }
};

struct VSolve {
    VTable table;
    IterationTrace trace;
    bool converged() const { return trace.converged(); }
};

// Iterates f_{n+1} = T f_n from f0 until the residual drops to tol or
// max_iters is reached. Hitting max_iters is not an error: the advantage
// operator may legitimately fail to contract, so the result is only flagged
// non-converged. The q overload accepts every q-table operator; the v
// overload requires optimality_v.
QSolve fixed_point_iterate(const OperatorKind& op, const Mdp& m, const QTable& f0,
                           FixedPointOptions opt = {});
VSolve fixed_point_iterate(const OperatorKind& op, const Mdp& m, const VTable& f0,
                           FixedPointOptions opt = {});

// Exact fixed point of the expectation operator: solves the linear system
// q = r + gamma * P * Pi * q by partial-pivoting Gaussian elimination on the
// (S*A)-dimensional system. Independent of the iterative path; serves as the
// oracle for it. gamma < 1 keeps the system nonsingular (checked anyway).
QTable exact_q_pi(const Mdp& m, const Policy& pi);

// Fixed-point iteration of expectation_q(pi) from the zero table.
QSolve policy_evaluation(const Mdp& m, const Policy& pi, FixedPointOptions opt = {});

struct PolicyIterationResult {
    Policy policy;
    QTable q;
    std::int64_t outer_iterations = 0;
    bool converged = false;
    // Number of states whose greedy action changed, one entry per outer step.
    std::vector<int> policy_changes;
};

// Alternates evaluation (to opt.tol) and greedy improvement until the policy
// is stable or max_outer is exceeded.
PolicyIterationResult policy_iteration(const Mdp& m, const Policy& pi0,
                                       FixedPointOptions eval_opt = {},
                                       std::int64_t max_outer = 1000);

struct RateReport {
    enum class Status { ok, insufficient_data };
    Status status = Status::insufficient_data;
    bool bound_holds = false;   // dist_n <= gamma^n * dist_0 + slack at every n
    std::int64_t violations = 0;
    double log_slope = 0.0;     // least-squares slope of log(dist) vs n
    std::int64_t points_used = 0;
};

// Checks the geometric convergence bound along a converged contraction trace
// and fits the empirical rate. Traces with fewer than 3 recorded iterations
// yield insufficient_data.
RateReport convergence_rate_check(const IterationTrace& trace, double gamma,
                                  double slack = 1e-9);

// CSV columns: iter,residual,dist_to_final (one row per iteration n >= 1).
void write_trace_csv(const IterationTrace& trace, const std::string& path);

} // namespace rlop
