#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rlop/mdp.hpp"

namespace rlop {

// The operator family. optimality_v acts on state-value tables, the rest on
// action-value tables. expectation_q and advantage_q evaluate a fixed policy;
// consistent_q replaces the max with the current entry on self-transitions.
enum class OperatorTag {
    optimality_v,
    optimality_q,
    expectation_q,
    consistent_q,
    advantage_q,
};

// CLI / config spellings: optimality-v, optimality-q, expectation-q,
// consistent, advantage.
const char* to_string(OperatorTag tag);
std::optional<OperatorTag> operator_tag_from_string(std::string_view name);

/**
 * Operator selection together with its per-kind extras. expectation_q and
 * advantage_q require a policy; advantage_q additionally carries a finite
 * coefficient beta >= 0.
 */
struct OperatorKind {
    OperatorTag tag = OperatorTag::optimality_q;
    std::optional<Policy> policy;
    double beta = 0.0;

    static OperatorKind optimality_v() { return {OperatorTag::optimality_v, {}, 0.0}; }
    static OperatorKind optimality_q() { return {OperatorTag::optimality_q, {}, 0.0}; }
    static OperatorKind expectation_q(Policy pi) {
        return {OperatorTag::expectation_q, std::move(pi), 0.0};
    }
    static OperatorKind consistent_q() { return {OperatorTag::consistent_q, {}, 0.0}; }
    static OperatorKind advantage_q(Policy pi, double beta) {
        return {OperatorTag::advantage_q, std::move(pi), beta};
    }
};

// Throws std::invalid_argument when the policy/beta payload does not match
// the tag's requirements.
void validate(const OperatorKind& op);

/**
 * Decaying coefficient sequence for the advantage operator. Both families
 * have a finite total sum and decay monotonically to zero:
 *   geometric:      beta_j = beta0 * lambda^j,    sum = beta0 / (1 - lambda)
 *   inverse_square: beta_j = beta0 / (1 + j)^2,   sum = beta0 * pi^2 / 6
 */
class BetaSchedule {
public:
    enum class Family { geometric, inverse_square };

    static BetaSchedule geometric(double beta0, double lambda);
    static BetaSchedule inverse_square(double beta0);
    static BetaSchedule zero() { return geometric(0.0, 0.5); }

    double at(std::int64_t j) const; // beta_j, monotone non-increasing in j
    double sum_bound() const;        // analytic upper bound on sum_j beta_j

    // Smallest J with beta_j < eps for all j >= J (computable decay witness).
    std::int64_t first_index_below(double eps) const;

    Family family() const { return family_; }
    double beta0() const { return beta0_; }
    double lambda() const { return lambda_; }

    // "geometric:<beta0>:<lambda>" | "invsq:<beta0>"
    static BetaSchedule parse(const std::string& text);
    std::string to_string() const;

private:
    Family family_ = Family::geometric;
    double beta0_ = 0.0;
    double lambda_ = 0.5;
};

// One application of each operator. All are pure: inputs are never mutated,
// and the summation order is fixed (s' ascending, then a' ascending) so
// results are bit-reproducible.

// out[s] = max_a [ r(s,a) + gamma * sum_{s'} P[s][a][s'] * v[s'] ]
VTable apply_optimality_v(const Mdp& m, const VTable& v);

// out[s][a] = r(s,a) + gamma * sum_{s'} P[s][a][s'] * max_{a'} q[s'][a']
QTable apply_optimality_q(const Mdp& m, const QTable& q);

// out[s][a] = r(s,a) + gamma * sum_{s'} P[s][a][s'] * sum_{a'} pi[s'][a'] q[s'][a']
QTable apply_expectation_q(const Mdp& m, const Policy& pi, const QTable& q);

// Self-transitions bootstrap from q[s][a] instead of the max:
// out[s][a] = r(s,a) + gamma * sum_{s'} P[s][a][s'] *
//                 ( 1{s' != s} max_{a'} q[s'][a'] + 1{s' == s} q[s][a] )
QTable apply_consistent(const Mdp& m, const QTable& q);

// Expectation operator plus beta times the advantage of (s,a) under pi:
// out[s][a] = (expectation_q out)[s][a] + beta * (q[s][a] - sum_b pi[s][b] q[s][b])
QTable apply_advantage(const Mdp& m, const Policy& pi, const QTable& q, double beta);

// Dispatch through OperatorKind; q-table operators only (optimality_v has a
// VTable signature and is dispatched by the solver overloads).
QTable apply_operator(const OperatorKind& op, const Mdp& m, const QTable& q);

} // namespace rlop
