#include "rlop/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rlop/rng.hpp"

namespace rlop {

Policy Policy::uniform(int n_states, int n_actions) {
    Policy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.assign(static_cast<std::size_t>(n_states) * n_actions,
                    1.0 / n_actions);
    return pi;
}

Policy Policy::deterministic(int n_states, const std::vector<int>& actions,
                             int n_actions) {
    if (static_cast<int>(actions.size()) != n_states)
        throw std::invalid_argument("deterministic policy needs one action per state");
    Policy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    for (int s = 0; s < n_states; ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw std::out_of_range("action index out of range");
        pi.at(s, actions[s]) = 1.0;
    }
    return pi;
}

QTable QTable::dense(std::int64_t n_states, int n_actions, double fill) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("QTable dimensions must be positive");
    QTable q;
    q.n_states_ = n_states;
    q.n_actions_ = n_actions;
    q.dense_.assign(static_cast<std::size_t>(n_states) * n_actions, fill);
    return q;
}

QTable QTable::sparse(std::int64_t n_states, int n_actions, double default_value) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("QTable dimensions must be positive");
    QTable q;
    q.n_states_ = n_states;
    q.n_actions_ = n_actions;
    q.sparse_ = true;
    q.default_ = default_value;
    return q;
}

double QTable::at(std::int64_t s, int a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
        throw std::out_of_range("QTable index out of range");
    if (!sparse_)
        return dense_[static_cast<std::size_t>(s) * n_actions_ + a];
    auto it = rows_.find(s);
    return it == rows_.end() ? default_ : it->second[static_cast<std::size_t>(a)];
}

void QTable::set(std::int64_t s, int a, double value) {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
        throw std::out_of_range("QTable index out of range");
    if (!sparse_) {
        dense_[static_cast<std::size_t>(s) * n_actions_ + a] = value;
        return;
    }
    auto it = rows_.find(s);
    if (it == rows_.end())
        it = rows_.emplace(s, std::vector<double>(n_actions_, default_)).first;
    it->second[static_cast<std::size_t>(a)] = value;
}

double QTable::row_max(std::int64_t s) const {
    double best = at(s, 0);
    for (int a = 1; a < n_actions_; ++a) best = std::max(best, at(s, a));
    return best;
}

int QTable::row_argmax(std::int64_t s) const {
    int best = 0;
    double best_value = at(s, 0);
    for (int a = 1; a < n_actions_; ++a) {
        const double v = at(s, a);
        if (v > best_value) {
            best_value = v;
            best = a;
        }
    }
    return best;
}

std::int64_t QTable::stored_states() const {
    return sparse_ ? static_cast<std::int64_t>(rows_.size()) : n_states_;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& issue : issues) out << issue << '\n';
    return out.str();
}

ValidationReport validate_mdp(const Mdp& m) {
    ValidationReport report;
    auto add = [&report](const std::string& msg) { report.issues.push_back(msg); };

    if (m.n_states < 1) add("n_states must be a positive integer");
    if (m.n_actions < 1) add("n_actions must be a positive integer");
    if (!(m.gamma >= 0.0 && m.gamma < 1.0)) {
        std::ostringstream msg;
        msg << "gamma out of range [0,1): " << m.gamma;
        add(msg.str());
    }
    if (m.n_states < 1 || m.n_actions < 1) return report;

    const std::size_t want = static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states;
    if (m.transition.size() != want) {
        add("transition tensor has wrong size");
        return report;
    }
    if (m.reward_sas.size() != want) {
        add("reward tensor has wrong size");
        return report;
    }

    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double row_sum = 0.0;
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                const double p = m.p(s, a, s2);
                if (!(p >= 0.0 && p <= 1.0)) {
                    std::ostringstream msg;
                    msg << "probability out of [0,1] at (s=" << s << ",a=" << a
                        << ",s'=" << s2 << "): " << p;
                    add(msg.str());
                }
                if (!std::isfinite(m.r(s, a, s2))) {
                    std::ostringstream msg;
                    msg << "non-finite reward at (s=" << s << ",a=" << a
                        << ",s'=" << s2 << ")";
                    add(msg.str());
                }
                row_sum += p;
            }
            if (std::abs(row_sum - 1.0) > kSimplexTolerance) {
                std::ostringstream msg;
                msg << "row-sum violation at (s=" << s << ",a=" << a
                    << "): sum=" << row_sum;
                add(msg.str());
            }
        }
    }
    return report;
}

double reward_sa(const Mdp& m, int s, int a) {
    if (s < 0 || s >= m.n_states || a < 0 || a >= m.n_actions)
        throw std::out_of_range("reward_sa index out of range");
    double total = 0.0;
    for (int s2 = 0; s2 < m.n_states; ++s2) total += m.p(s, a, s2) * m.r(s, a, s2);
    return total;
}

Policy greedy_policy(const QTable& q) {
    const int n_states = static_cast<int>(q.n_states());
    std::vector<int> actions(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) actions[s] = q.row_argmax(s);
    return Policy::deterministic(n_states, actions, q.n_actions());
}

VTable state_values_from_q(const QTable& q, const Policy& pi) {
    if (pi.n_states != q.n_states() || pi.n_actions != q.n_actions())
        throw std::invalid_argument("policy and q-table dimensions differ");
    VTable v = VTable::zeros(pi.n_states);
    for (int s = 0; s < pi.n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < pi.n_actions; ++a) total += pi.at(s, a) * q.at(s, a);
        v.at(s) = total;
    }
    return v;
}

QTable advantage(const QTable& q, const Policy& pi) {
    if (pi.n_states != q.n_states() || pi.n_actions != q.n_actions())
        throw std::invalid_argument("policy and q-table dimensions differ");
    const VTable v = state_values_from_q(q, pi);
    QTable out = QTable::dense(q.n_states(), q.n_actions());
    for (int s = 0; s < pi.n_states; ++s)
        for (int a = 0; a < pi.n_actions; ++a)
            out.set(s, a, q.at(s, a) - v.at(s));
    return out;
}

double sup_norm_distance(const QTable& f, const QTable& g) {
    if (f.n_states() != g.n_states() || f.n_actions() != g.n_actions())
        throw std::invalid_argument("q-table shapes differ");
    double worst = 0.0;
    for (std::int64_t s = 0; s < f.n_states(); ++s)
        for (int a = 0; a < f.n_actions(); ++a)
            worst = std::max(worst, std::abs(f.at(s, a) - g.at(s, a)));
    return worst;
}

double sup_norm_distance(const VTable& f, const VTable& g) {
    if (f.values.size() != g.values.size())
        throw std::invalid_argument("v-table shapes differ");
    double worst = 0.0;
    for (std::size_t s = 0; s < f.values.size(); ++s)
        worst = std::max(worst, std::abs(f.values[s] - g.values[s]));
    return worst;
}

namespace {

Mdp random_mdp_impl(std::uint64_t seed, int n_states, int n_actions,
                    std::pair<double, double> reward_range, double gamma,
                    bool allow_self_transitions) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("random_mdp dimensions must be positive");
    if (!allow_self_transitions && n_states < 2)
        throw std::invalid_argument("removing self-transitions needs >= 2 states");
    Rng rng(seed);
    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    const std::size_t size = static_cast<std::size_t>(n_states) * n_actions * n_states;
    m.transition.assign(size, 0.0);
    m.reward_sas.assign(size, 0.0);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double row_sum = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double w = (!allow_self_transitions && s2 == s) ? 0.0
                                                                : rng.uniform(0.01, 1.0);
                m.transition[m.idx(s, a, s2)] = w;
                row_sum += w;
            }
            for (int s2 = 0; s2 < n_states; ++s2) m.transition[m.idx(s, a, s2)] /= row_sum;
            for (int s2 = 0; s2 < n_states; ++s2)
                m.reward_sas[m.idx(s, a, s2)] =
                    rng.uniform(reward_range.first, reward_range.second);
        }
    }
    return m;
}

} // namespace

Mdp random_mdp(std::uint64_t seed, int n_states, int n_actions,
               std::pair<double, double> reward_range, double gamma) {
    return random_mdp_impl(seed, n_states, n_actions, reward_range, gamma, true);
}

Mdp random_mdp_without_self_transitions(std::uint64_t seed, int n_states,
                                        int n_actions,
                                        std::pair<double, double> reward_range,
                                        double gamma) {
    return random_mdp_impl(seed, n_states, n_actions, reward_range, gamma, false);
}

Policy random_policy(Rng& rng, int n_states, int n_actions) {
    Policy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    for (int s = 0; s < n_states; ++s) {
        double row_sum = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            const double w = rng.uniform(0.01, 1.0);
            pi.at(s, a) = w;
            row_sum += w;
        }
        for (int a = 0; a < n_actions; ++a) pi.at(s, a) /= row_sum;
    }
    return pi;
}

QTable random_qtable(Rng& rng, int n_states, int n_actions, double lo, double hi) {
    QTable q = QTable::dense(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) q.set(s, a, rng.uniform(lo, hi));
    return q;
}

VTable random_vtable(Rng& rng, int n_states, double lo, double hi) {
    VTable v = VTable::zeros(n_states);
    for (int s = 0; s < n_states; ++s) v.at(s) = rng.uniform(lo, hi);
    return v;
}

} // namespace rlop
