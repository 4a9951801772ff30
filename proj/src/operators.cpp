#include "rlop/operators.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rlop {

const char* to_string(OperatorTag tag) {
    switch (tag) {
    case OperatorTag::optimality_v: return "optimality-v";
    case OperatorTag::optimality_q: return "optimality-q";
    case OperatorTag::expectation_q: return "expectation-q";
    case OperatorTag::consistent_q: return "consistent";
    case OperatorTag::advantage_q: return "advantage";
    }
    return "?";
}

std::optional<OperatorTag> operator_tag_from_string(std::string_view name) {
    if (name == "optimality-v") return OperatorTag::optimality_v;
    if (name == "optimality-q") return OperatorTag::optimality_q;
    if (name == "expectation-q") return OperatorTag::expectation_q;
    if (name == "consistent") return OperatorTag::consistent_q;
    if (name == "advantage") return OperatorTag::advantage_q;
    return std::nullopt;
}

void validate(const OperatorKind& op) {
    const bool needs_policy =
        op.tag == OperatorTag::expectation_q || op.tag == OperatorTag::advantage_q;
    if (needs_policy && !op.policy.has_value())
        throw std::invalid_argument(std::string(to_string(op.tag)) +
                                    " requires a policy");
    if (!needs_policy && op.policy.has_value())
        throw std::invalid_argument(std::string(to_string(op.tag)) +
                                    " must not carry a policy");
    if (op.tag == OperatorTag::advantage_q &&
        !(std::isfinite(op.beta) && op.beta >= 0.0))
        throw std::invalid_argument("advantage operator needs finite beta >= 0");
}

BetaSchedule BetaSchedule::geometric(double beta0, double lambda) {
    if (!(beta0 >= 0.0) || !std::isfinite(beta0))
        throw std::invalid_argument("beta0 must be finite and >= 0");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("lambda must lie in (0,1)");
    BetaSchedule s;
    s.family_ = Family::geometric;
    s.beta0_ = beta0;
    s.lambda_ = lambda;
    return s;
}

BetaSchedule BetaSchedule::inverse_square(double beta0) {
    if (!(beta0 >= 0.0) || !std::isfinite(beta0))
        throw std::invalid_argument("beta0 must be finite and >= 0");
    BetaSchedule s;
    s.family_ = Family::inverse_square;
    s.beta0_ = beta0;
    return s;
}

double BetaSchedule::at(std::int64_t j) const {
    if (j < 0) throw std::invalid_argument("schedule index must be >= 0");
    if (family_ == Family::geometric)
        return beta0_ * std::pow(lambda_, static_cast<double>(j));
    const double n = static_cast<double>(j) + 1.0;
    return beta0_ / (n * n);
}

double BetaSchedule::sum_bound() const {
    if (family_ == Family::geometric) return beta0_ / (1.0 - lambda_);
    return beta0_ * 1.6449340668482264; // pi^2 / 6
}

std::int64_t BetaSchedule::first_index_below(double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (beta0_ == 0.0 || beta0_ < eps) return 0;
    if (family_ == Family::geometric) {
        const double j = std::ceil(std::log(eps / beta0_) / std::log(lambda_));
        std::int64_t candidate = static_cast<std::int64_t>(std::max(0.0, j));
        while (at(candidate) >= eps) ++candidate; // guard against rounding
        return candidate;
    }
    const double n = std::ceil(std::sqrt(beta0_ / eps));
    std::int64_t candidate = static_cast<std::int64_t>(std::max(0.0, n - 1.0));
    while (at(candidate) >= eps) ++candidate;
    return candidate;
}

BetaSchedule BetaSchedule::parse(const std::string& text) {
    std::istringstream in(text);
    std::string head;
    std::getline(in, head, ':');
    if (head == "geometric") {
        std::string b0, lam;
        if (!std::getline(in, b0, ':') || !std::getline(in, lam))
            throw std::invalid_argument("expected geometric:<beta0>:<lambda>");
        return geometric(std::stod(b0), std::stod(lam));
    }
    if (head == "invsq") {
        std::string b0;
        if (!std::getline(in, b0))
            throw std::invalid_argument("expected invsq:<beta0>");
        return inverse_square(std::stod(b0));
    }
    throw std::invalid_argument("unknown beta schedule family: " + head);
}

std::string BetaSchedule::to_string() const {
    std::ostringstream out;
    if (family_ == Family::geometric)
        out << "geometric:" << beta0_ << ':' << lambda_;
    else
        out << "invsq:" << beta0_;
    return out.str();
}

namespace {

void require_q_shape(const Mdp& m, const QTable& q) {
    if (q.n_states() != m.n_states || q.n_actions() != m.n_actions)
        throw std::invalid_argument("q-table shape does not match the MDP");
}

void require_policy_shape(const Mdp& m, const Policy& pi) {
    if (pi.n_states != m.n_states || pi.n_actions != m.n_actions)
        throw std::invalid_argument("policy shape does not match the MDP");
}

} // namespace

VTable apply_optimality_v(const Mdp& m, const VTable& v) {
    if (v.n_states() != m.n_states)
        throw std::invalid_argument("v-table shape does not match the MDP");
    VTable out = VTable::zeros(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < m.n_actions; ++a) {
            double future = 0.0;
            for (int s2 = 0; s2 < m.n_states; ++s2) future += m.p(s, a, s2) * v.at(s2);
            best = std::max(best, reward_sa(m, s, a) + m.gamma * future);
        }
        out.at(s) = best;
    }
    return out;
}

namespace {

std::vector<double> row_maxes(const QTable& q) {
    std::vector<double> maxes(static_cast<std::size_t>(q.n_states()));
    for (std::int64_t s = 0; s < q.n_states(); ++s) maxes[s] = q.row_max(s);
    return maxes;
}

std::vector<double> policy_values(const Policy& pi, const QTable& q) {
    std::vector<double> values(static_cast<std::size_t>(pi.n_states));
    for (int s = 0; s < pi.n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < pi.n_actions; ++a) total += pi.at(s, a) * q.at(s, a);
        values[s] = total;
    }
    return values;
}

} // namespace

QTable apply_optimality_q(const Mdp& m, const QTable& q) {
    require_q_shape(m, q);
    const std::vector<double> maxes = row_maxes(q);
    QTable out = QTable::dense(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double future = 0.0;
            for (int s2 = 0; s2 < m.n_states; ++s2)
                future += m.p(s, a, s2) * maxes[s2];
            out.set(s, a, reward_sa(m, s, a) + m.gamma * future);
        }
    }
    return out;
}

QTable apply_expectation_q(const Mdp& m, const Policy& pi, const QTable& q) {
    require_q_shape(m, q);
    require_policy_shape(m, pi);
    const std::vector<double> values = policy_values(pi, q);
    QTable out = QTable::dense(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double future = 0.0;
            for (int s2 = 0; s2 < m.n_states; ++s2)
                future += m.p(s, a, s2) * values[s2];
            out.set(s, a, reward_sa(m, s, a) + m.gamma * future);
        }
    }
    return out;
}

QTable apply_consistent(const Mdp& m, const QTable& q) {
    require_q_shape(m, q);
    const std::vector<double> maxes = row_maxes(q);
    QTable out = QTable::dense(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double future = 0.0;
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                // The indicator compares exact state indices.
                const double bootstrap = (s2 == s) ? q.at(s, a) : maxes[s2];
                future += m.p(s, a, s2) * bootstrap;
            }
            out.set(s, a, reward_sa(m, s, a) + m.gamma * future);
        }
    }
    return out;
}

QTable apply_advantage(const Mdp& m, const Policy& pi, const QTable& q, double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
    QTable out = apply_expectation_q(m, pi, q);
    if (beta == 0.0) return out; // the advantage term vanishes exactly
    const std::vector<double> values = policy_values(pi, q);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            out.set(s, a, out.at(s, a) + beta * (q.at(s, a) - values[s]));
    return out;
}

QTable apply_operator(const OperatorKind& op, const Mdp& m, const QTable& q) {
    validate(op);
    switch (op.tag) {
    case OperatorTag::optimality_q: return apply_optimality_q(m, q);
    case OperatorTag::expectation_q: return apply_expectation_q(m, *op.policy, q);
    case OperatorTag::consistent_q: return apply_consistent(m, q);
    case OperatorTag::advantage_q:
        return apply_advantage(m, *op.policy, q, op.beta);
    case OperatorTag::optimality_v:
        throw std::invalid_argument("optimality-v acts on v-tables");
    }
    throw std::logic_error("unreachable");
}

} // namespace rlop
