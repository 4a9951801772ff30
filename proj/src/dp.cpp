#include "rlop/dp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rlop/mdp_io.hpp"

namespace rlop {

namespace {

// Shared iteration core. Step must be a pure function of its argument so the
// replay pass reproduces the exact iterates.
template <class Table, class StepFn>
std::pair<Table, IterationTrace> iterate_core(StepFn step, const Table& f0,
                                              const FixedPointOptions& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (opt.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    IterationTrace trace;
    Table current = f0;
    std::int64_t iterations = 0;
    for (std::int64_t n = 1; n <= opt.max_iters; ++n) {
        Table next = step(current);
        const double residual = sup_norm_distance(next, current);
        trace.steps.push_back({n, residual, 0.0});
        current = std::move(next);
        iterations = n;
        if (residual <= opt.tol) {
            trace.reason = IterationTrace::Termination::converged;
            break;
        }
    }

    // Replay to fill distances to the final iterate.
    trace.initial_distance = sup_norm_distance(f0, current);
    Table replay = f0;
    for (std::int64_t n = 1; n <= iterations; ++n) {
        replay = step(replay);
        trace.steps[static_cast<std::size_t>(n - 1)].dist_to_final =
            sup_norm_distance(replay, current);
    }
    return {std::move(current), std::move(trace)};
}

} // namespace

QSolve fixed_point_iterate(const OperatorKind& op, const Mdp& m, const QTable& f0,
                           FixedPointOptions opt) {
    validate(op);
    if (op.tag == OperatorTag::optimality_v)
        throw std::invalid_argument("optimality-v needs a v-table start");
    auto step = [&op, &m](const QTable& q) { return apply_operator(op, m, q); };
    auto [table, trace] = iterate_core<QTable>(step, f0, opt);
    return {std::move(table), std::move(trace)};
}

VSolve fixed_point_iterate(const OperatorKind& op, const Mdp& m, const VTable& f0,
                           FixedPointOptions opt) {
    validate(op);
    if (op.tag != OperatorTag::optimality_v)
        throw std::invalid_argument("v-table start requires the optimality-v operator");
    auto step = [&m](const VTable& v) { return apply_optimality_v(m, v); };
    auto [table, trace] = iterate_core<VTable>(step, f0, opt);
    return {std::move(table), std::move(trace)};
}

QTable exact_q_pi(const Mdp& m, const Policy& pi) {
    const ValidationReport report = validate_mdp(m);
    if (!report.ok())
        throw std::invalid_argument("exact_q_pi needs a valid MDP:\n" + report.to_string());
    if (pi.n_states != m.n_states || pi.n_actions != m.n_actions)
        throw std::invalid_argument("policy shape does not match the MDP");

    const int n = m.n_states * m.n_actions;
    auto flat = [&m](int s, int a) { return s * m.n_actions + a; };

    // A = I - gamma * P * Pi, b = r(s,a), solved in place with partial pivoting.
    std::vector<double> a_mat(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const int row = flat(s, a);
            b[row] = reward_sa(m, s, a);
            a_mat[static_cast<std::size_t>(row) * n + row] += 1.0;
            for (int s2 = 0; s2 < m.n_states; ++s2)
                for (int a2 = 0; a2 < m.n_actions; ++a2)
                    a_mat[static_cast<std::size_t>(row) * n + flat(s2, a2)] -=
                        m.gamma * m.p(s, a, s2) * pi.at(s2, a2);
        }
    }

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a_mat[static_cast<std::size_t>(col) * n + col]);
        for (int row = col + 1; row < n; ++row) {
            const double candidate = std::abs(a_mat[static_cast<std::size_t>(row) * n + col]);
            if (candidate > best) {
                best = candidate;
                pivot = row;
            }
        }
        if (best < 1e-14)
            throw std::runtime_error("exact_q_pi: singular system (unexpected for gamma < 1)");
        if (pivot != col) {
            for (int k = col; k < n; ++k)
                std::swap(a_mat[static_cast<std::size_t>(pivot) * n + k],
                          a_mat[static_cast<std::size_t>(col) * n + k]);
            std::swap(b[pivot], b[col]);
        }
        const double diagonal = a_mat[static_cast<std::size_t>(col) * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double factor = a_mat[static_cast<std::size_t>(row) * n + col] / diagonal;
            if (factor == 0.0) continue;
            for (int k = col; k < n; ++k)
                a_mat[static_cast<std::size_t>(row) * n + k] -=
                    factor * a_mat[static_cast<std::size_t>(col) * n + k];
            b[row] -= factor * b[col];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int row = n - 1; row >= 0; --row) {
        double total = b[row];
        for (int k = row + 1; k < n; ++k)
            total -= a_mat[static_cast<std::size_t>(row) * n + k] * x[k];
        x[row] = total / a_mat[static_cast<std::size_t>(row) * n + row];
    }

    QTable q = QTable::dense(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) q.set(s, a, x[flat(s, a)]);
    return q;
}

QSolve policy_evaluation(const Mdp& m, const Policy& pi, FixedPointOptions opt) {
    return fixed_point_iterate(OperatorKind::expectation_q(pi), m,
                               QTable::dense(m.n_states, m.n_actions), opt);
}

PolicyIterationResult policy_iteration(const Mdp& m, const Policy& pi0,
                                       FixedPointOptions eval_opt,
                                       std::int64_t max_outer) {
    if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
    PolicyIterationResult result;
    result.policy = pi0;
    for (std::int64_t outer = 1; outer <= max_outer; ++outer) {
        result.q = policy_evaluation(m, result.policy, eval_opt).table;
        Policy improved = greedy_policy(result.q);
        // Whole-row comparison: pi0 may be stochastic on the first pass.
        int changes = 0;
        for (int s = 0; s < m.n_states; ++s)
            for (int a = 0; a < m.n_actions; ++a)
                if (improved.at(s, a) != result.policy.at(s, a)) {
                    ++changes;
                    break;
                }
        result.policy_changes.push_back(changes);
        result.outer_iterations = outer;
        if (changes == 0) {
            result.converged = true;
            break;
        }
        result.policy = std::move(improved);
    }
    return result;
}

RateReport convergence_rate_check(const IterationTrace& trace, double gamma,
                                  double slack) {
    RateReport report;
    if (trace.steps.size() < 3) {
        report.status = RateReport::Status::insufficient_data;
        return report;
    }
    report.status = RateReport::Status::ok;
    report.bound_holds = true;

    const double d0 = trace.initial_distance;
    double power = 1.0;
    for (const auto& step : trace.steps) {
        power *= gamma;
        if (step.dist_to_final > power * d0 + slack) {
            report.bound_holds = false;
            ++report.violations;
        }
    }

    // Least-squares slope of log(dist) against n over the informative range
    // (distances near the proxy's own error are excluded).
    double sum_n = 0.0, sum_y = 0.0, sum_nn = 0.0, sum_ny = 0.0;
    std::int64_t count = 0;
    const double floor = std::max(d0 * 1e-12, 1e-280);
    for (const auto& step : trace.steps) {
        if (step.dist_to_final <= floor) continue;
        const double n = static_cast<double>(step.iter);
        const double y = std::log(step.dist_to_final);
        sum_n += n;
        sum_y += y;
        sum_nn += n * n;
        sum_ny += n * y;
        ++count;
    }
    report.points_used = count;
    if (count >= 2) {
        const double denom = count * sum_nn - sum_n * sum_n;
        report.log_slope = (count * sum_ny - sum_n * sum_y) / denom;
    }
    return report;
}

void write_trace_csv(const IterationTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "iter,residual,dist_to_final\n";
    for (const auto& step : trace.steps)
        out << step.iter << ',' << format_double(step.residual) << ','
            << format_double(step.dist_to_final) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rlop
