#include "rlop/verifier.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "rlop/rng.hpp"

namespace rlop {

const char* to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

constexpr double kContractionSlack = 1e-10;
constexpr double kMonotonicitySlack = 1e-12;

struct Instance {
    Mdp mdp;
    std::optional<Policy> policy;
    std::vector<double> u, v;
};

bool needs_policy(OperatorTag op) {
    return op == OperatorTag::expectation_q || op == OperatorTag::advantage_q;
}

// Everything about a trial derives from its instance seed, so a stored seed
// replays the exact instance.
Instance draw_instance(OperatorTag op, std::uint64_t instance_seed,
                       const TrialLimits& limits, bool monotone_pair,
                       std::optional<double> fixed_gamma) {
    Rng rng(instance_seed);
    const int min_actions = op == OperatorTag::advantage_q ? 2 : 1;
    const int n_states = rng.uniform_int(2, limits.max_states);
    const int n_actions = rng.uniform_int(min_actions, std::max(min_actions, limits.max_actions));
    const double gamma =
        fixed_gamma ? *fixed_gamma : rng.uniform(limits.gamma_lo, limits.gamma_hi);
    const std::uint64_t mdp_seed = rng.next_u64();

    Instance inst;
    inst.mdp = random_mdp(mdp_seed, n_states, n_actions, {-1.0, 1.0}, gamma);
    if (needs_policy(op)) inst.policy = random_policy(rng, n_states, n_actions);

    const std::size_t size = op == OperatorTag::optimality_v
                                 ? static_cast<std::size_t>(n_states)
                                 : static_cast<std::size_t>(n_states) * n_actions;
    inst.u.resize(size);
    inst.v.resize(size);
    for (auto& x : inst.u) x = rng.uniform(-limits.value_range, limits.value_range);
    if (monotone_pair) {
        for (std::size_t i = 0; i < size; ++i)
            inst.v[i] = inst.u[i] + rng.uniform(0.0, limits.value_range);
    } else {
        for (auto& x : inst.v) x = rng.uniform(-limits.value_range, limits.value_range);
    }
    return inst;
}

std::vector<double> apply_flat(OperatorTag op, const Instance& inst,
                               const std::vector<double>& table, double beta) {
    const Mdp& m = inst.mdp;
    if (op == OperatorTag::optimality_v) {
        const VTable out = apply_optimality_v(m, VTable{table});
        return out.values;
    }
    QTable q = QTable::dense(m.n_states, m.n_actions);
    q.dense_values() = table;
    QTable out;
    switch (op) {
    case OperatorTag::optimality_q: out = apply_optimality_q(m, q); break;
    case OperatorTag::expectation_q: out = apply_expectation_q(m, *inst.policy, q); break;
    case OperatorTag::consistent_q: out = apply_consistent(m, q); break;
    case OperatorTag::advantage_q:
        out = apply_advantage(m, *inst.policy, q, beta);
        break;
    case OperatorTag::optimality_v: break; // handled above
    }
    return out.dense_values();
}

double sup_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

Witness make_witness(std::uint64_t trial, std::uint64_t instance_seed,
                     const Instance& inst, double beta) {
    Witness w;
    w.trial = trial;
    w.instance_seed = instance_seed;
    w.gamma = inst.mdp.gamma;
    w.beta = beta;
    w.mdp = inst.mdp;
    w.policy = inst.policy;
    w.u = inst.u;
    w.v = inst.v;
    return w;
}

} // namespace

PropertyReport check_contraction(OperatorTag op, std::uint64_t trials,
                                 std::uint64_t seed, TrialLimits limits) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    PropertyReport report;
    report.property = std::string("contraction:") + to_string(op);
    report.trials = trials;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t instance_seed = derive_seed(seed, trial);
        const Instance inst = draw_instance(op, instance_seed, limits, false, {});
        const double lhs = sup_norm(apply_flat(op, inst, inst.u, 0.0),
                                    apply_flat(op, inst, inst.v, 0.0));
        const double rhs = inst.mdp.gamma * sup_norm(inst.u, inst.v);
        if (lhs > rhs + kContractionSlack) {
            Witness w = make_witness(trial, instance_seed, inst, 0.0);
            w.lhs = lhs;
            w.rhs = rhs;
            w.detail = "sup|Tu - Tv| exceeds gamma * sup|u - v|";
            report.violations.push_back(std::move(w));
        }
    }
    report.verdict = report.violations.empty() ? Verdict::pass : Verdict::fail;
    return report;
}

PropertyReport check_monotonicity(OperatorTag op, std::uint64_t trials,
                                  std::uint64_t seed, TrialLimits limits) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    PropertyReport report;
    report.property = std::string("monotonicity:") + to_string(op);
    report.trials = trials;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t instance_seed = derive_seed(seed, trial);
        const Instance inst = draw_instance(op, instance_seed, limits, true, {});
        const std::vector<double> tu = apply_flat(op, inst, inst.u, 0.0);
        const std::vector<double> tv = apply_flat(op, inst, inst.v, 0.0);
        for (std::size_t i = 0; i < tu.size(); ++i) {
            if (tu[i] > tv[i] + kMonotonicitySlack) {
                Witness w = make_witness(trial, instance_seed, inst, 0.0);
                w.lhs = tu[i];
                w.rhs = tv[i];
                if (op == OperatorTag::optimality_v) {
                    w.s = static_cast<int>(i);
                } else {
                    w.s = static_cast<int>(i) / inst.mdp.n_actions;
                    w.a = static_cast<int>(i) % inst.mdp.n_actions;
                }
                w.detail = "(T u) > (T v) at an entry although u <= v";
                report.violations.push_back(std::move(w));
                break;
            }
        }
    }
    report.verdict = report.violations.empty() ? Verdict::pass : Verdict::fail;
    return report;
}

PropertyReport find_noncontraction_witness(double beta, double gamma,
                                           std::uint64_t trials, std::uint64_t seed,
                                           TrialLimits limits) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    PropertyReport report;
    report.property = "noncontraction-witness:advantage";
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t instance_seed = derive_seed(seed, trial);
        const Instance inst =
            draw_instance(OperatorTag::advantage_q, instance_seed, limits, false, gamma);
        const double lhs =
            sup_norm(apply_flat(OperatorTag::advantage_q, inst, inst.u, beta),
                     apply_flat(OperatorTag::advantage_q, inst, inst.v, beta));
        const double rhs = gamma * sup_norm(inst.u, inst.v);
        report.trials = trial + 1;
        if (lhs > rhs) { // strict: witness of non-contraction
            Witness w = make_witness(trial, instance_seed, inst, beta);
            w.lhs = lhs;
            w.rhs = rhs;
            w.detail = "sup|T_a u - T_a v| > gamma * sup|u - v|";
            report.violations.push_back(std::move(w));
            break;
        }
    }
    // A found witness is the expected outcome, not a failure of the search.
    report.verdict = Verdict::pass;
    return report;
}

std::pair<double, double> replay_witness(const Witness& w, OperatorTag op) {
    Instance inst;
    inst.mdp = w.mdp;
    inst.policy = w.policy;
    inst.u = w.u;
    inst.v = w.v;
    const double lhs = sup_norm(apply_flat(op, inst, inst.u, w.beta),
                                apply_flat(op, inst, inst.v, w.beta));
    const double rhs = w.gamma * sup_norm(inst.u, inst.v);
    return {lhs, rhs};
}

namespace {

struct PairedRun {
    QTable classical;
    QTable alternative;
    double residual_classical = std::numeric_limits<double>::infinity();
    double residual_alternative = std::numeric_limits<double>::infinity();
    bool gated = false;
};

PairedRun run_paired_iteration(const Mdp& m, const BetaSchedule& schedule,
                               const PairedIterationOptions& opt) {
    PairedRun run;
    run.classical = QTable::dense(m.n_states, m.n_actions);
    run.alternative = QTable::dense(m.n_states, m.n_actions);
    for (std::int64_t k = 0; k < opt.k_max; ++k) {
        const double beta_k = schedule.at(k);
        QTable next_classical = apply_optimality_q(m, run.classical);
        const Policy pi = greedy_policy(run.alternative);
        QTable next_alternative = apply_advantage(m, pi, run.alternative, beta_k);
        run.residual_classical = sup_norm_distance(next_classical, run.classical);
        run.residual_alternative = sup_norm_distance(next_alternative, run.alternative);
        run.classical = std::move(next_classical);
        run.alternative = std::move(next_alternative);
        // Once beta is negligible and both sequences have settled far below
        // the gate, later iterates cannot change any verdict.
        if (beta_k < 1e-13 && run.residual_classical < opt.residual_gate * 1e-4 &&
            run.residual_alternative < opt.residual_gate * 1e-4)
            break;
    }
    run.gated = run.residual_classical <= opt.residual_gate &&
                run.residual_alternative <= opt.residual_gate;
    return run;
}

} // namespace

PropertyReport check_optimality_preservation(const Mdp& m, const BetaSchedule& schedule,
                                             PairedIterationOptions opt) {
    if (opt.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    PropertyReport report;
    report.property = "optimality-preservation";
    report.trials = 1;
    const PairedRun run = run_paired_iteration(m, schedule, opt);
    if (!run.gated) {
        report.inconclusive_count = 1;
        report.verdict = Verdict::inconclusive;
        return report;
    }
    const VTable vb = state_values_from_q(run.classical, greedy_policy(run.classical));
    const VTable va = state_values_from_q(run.alternative, greedy_policy(run.alternative));
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const bool classical_suboptimal =
                run.classical.at(s, a) < vb.at(s) - opt.suboptimal_margin;
            if (classical_suboptimal && !(run.alternative.at(s, a) < va.at(s))) {
                Witness w;
                w.mdp = m;
                w.gamma = m.gamma;
                w.s = s;
                w.a = a;
                w.lhs = run.alternative.at(s, a);
                w.rhs = va.at(s);
                w.detail = "classical limit marks (s,a) suboptimal but alternative does not";
                report.violations.push_back(std::move(w));
            }
        }
    }
    report.verdict = report.violations.empty() ? Verdict::pass : Verdict::fail;
    return report;
}

PropertyReport check_gap_increasing(const Mdp& m, const BetaSchedule& schedule,
                                    PairedIterationOptions opt) {
    if (opt.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    PropertyReport report;
    report.property = "gap-increasing";
    report.trials = 1;
    const PairedRun run = run_paired_iteration(m, schedule, opt);
    if (!run.gated) {
        report.inconclusive_count = 1;
        report.verdict = Verdict::inconclusive;
        return report;
    }
    const VTable vb = state_values_from_q(run.classical, greedy_policy(run.classical));
    const VTable va = state_values_from_q(run.alternative, greedy_policy(run.alternative));
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const double classical_gap = std::abs(run.classical.at(s, a) - vb.at(s));
            const double alternative_gap = std::abs(run.alternative.at(s, a) - va.at(s));
            if (classical_gap > alternative_gap + opt.gap_tolerance) {
                Witness w;
                w.mdp = m;
                w.gamma = m.gamma;
                w.s = s;
                w.a = a;
                w.lhs = classical_gap;
                w.rhs = alternative_gap;
                w.detail = "alternative action gap shrank below the classical gap";
                report.violations.push_back(std::move(w));
            }
        }
    }
    report.verdict = report.violations.empty() ? Verdict::pass : Verdict::fail;
    return report;
}

GapSummary consistent_vs_classical_gap(const Mdp& m, double tol) {
    FixedPointOptions opt;
    opt.tol = tol;
    const QTable zeros = QTable::dense(m.n_states, m.n_actions);
    const QSolve consistent =
        fixed_point_iterate(OperatorKind::consistent_q(), m, zeros, opt);
    const QSolve classical =
        fixed_point_iterate(OperatorKind::optimality_q(), m, zeros, opt);

    GapSummary summary;
    summary.both_converged = consistent.converged() && classical.converged();
    summary.sup_norm_gap = sup_norm_distance(consistent.table, classical.table);
    int agree = 0;
    for (int s = 0; s < m.n_states; ++s)
        if (consistent.table.row_argmax(s) == classical.table.row_argmax(s)) ++agree;
    summary.greedy_agreement = static_cast<double>(agree) / m.n_states;
    summary.greedy_identical = agree == m.n_states;
    summary.consistent_fp = consistent.table;
    summary.classical_fp = classical.table;
    return summary;
}

void write_report_json(const PropertyReport& report, const std::string& path) {
    nlohmann::json doc;
    doc["property"] = report.property;
    doc["trials"] = report.trials;
    doc["verdict"] = to_string(report.verdict);
    doc["inconclusive"] = report.inconclusive_count;
    doc["violation_count"] = report.violations.size();
    auto& list = doc["violations"] = nlohmann::json::array();
    for (const auto& w : report.violations) {
        nlohmann::json entry;
        entry["trial"] = w.trial;
        entry["instance_seed"] = w.instance_seed;
        entry["gamma"] = w.gamma;
        entry["beta"] = w.beta;
        entry["n_states"] = w.mdp.n_states;
        entry["n_actions"] = w.mdp.n_actions;
        entry["s"] = w.s;
        entry["a"] = w.a;
        entry["lhs"] = w.lhs;
        entry["rhs"] = w.rhs;
        entry["detail"] = w.detail;
        entry["transition"] = w.mdp.transition;
        entry["reward_sas"] = w.mdp.reward_sas;
        if (w.policy) entry["policy"] = w.policy->probs;
        entry["u"] = w.u;
        entry["v"] = w.v;
        list.push_back(std::move(entry));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rlop
