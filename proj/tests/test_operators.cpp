#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "rlop/operators.hpp"
#include "rlop/rng.hpp"

using namespace rlop;

namespace {

// Single absorbing state, per-action rewards.
Mdp absorbing_mdp(const std::vector<double>& action_rewards, double gamma) {
    Mdp m;
    m.n_states = 1;
    m.n_actions = static_cast<int>(action_rewards.size());
    m.gamma = gamma;
    m.transition.assign(action_rewards.size(), 1.0);
    m.reward_sas = action_rewards;
    return m;
}

bool tables_equal(const QTable& a, const QTable& b) {
    for (std::int64_t s = 0; s < a.n_states(); ++s)
        for (int x = 0; x < a.n_actions(); ++x)
            if (a.at(s, x) != b.at(s, x)) return false;
    return true;
}

} // namespace

TEST_CASE("apply_optimality_v") {
    SUBCASE("gamma = 0 reduces to the best immediate reward") {
        const Mdp m = random_mdp(3, 4, 3, {-2.0, 2.0}, 0.0);
        const VTable out = apply_optimality_v(m, VTable::zeros(4));
        for (int s = 0; s < 4; ++s) {
            double best = -1e300;
            for (int a = 0; a < 3; ++a) best = std::max(best, reward_sa(m, s, a));
            CHECK(out.at(s) == doctest::Approx(best).epsilon(1e-12));
        }
    }
    SUBCASE("zero rewards keep the zero table fixed") {
        Mdp m = random_mdp(4, 3, 2, {0.0, 0.0}, 0.9);
        const VTable out = apply_optimality_v(m, VTable::zeros(3));
        for (int s = 0; s < 3; ++s) CHECK(out.at(s) == 0.0);
    }
    SUBCASE("matches the brute-force oracle") {
        const Mdp m = random_mdp(5, 5, 3, {-1.0, 1.0}, 0.9);
        Rng rng(100);
        const VTable v = random_vtable(rng, 5, -10.0, 10.0);
        const VTable out = apply_optimality_v(m, v);
        for (int s = 0; s < 5; ++s)
            CHECK(out.at(s) ==
                  doctest::Approx(oracle::optimality_v_entry(m, v, s)).epsilon(1e-12));
    }
}

TEST_CASE("apply_optimality_q") {
    SUBCASE("gamma = 0 reduces to r(s,a)") {
        const Mdp m = random_mdp(7, 4, 3, {-2.0, 2.0}, 0.0);
        const QTable out = apply_optimality_q(m, QTable::dense(4, 3));
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(out.at(s, a) == doctest::Approx(reward_sa(m, s, a)).epsilon(1e-12));
    }
    SUBCASE("absorbing state with unit reward") {
        const Mdp m = absorbing_mdp({1.0}, 0.9);
        const QTable out = apply_optimality_q(m, QTable::dense(1, 1));
        CHECK(out.at(0, 0) == 1.0);
        // The fixed point of the geometric recursion is 1 / (1 - gamma).
        QTable fixed = QTable::dense(1, 1);
        fixed.set(0, 0, 10.0);
        const QTable image = apply_optimality_q(m, fixed);
        CHECK(image.at(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("matches the brute-force oracle") {
        const Mdp m = random_mdp(11, 5, 3, {-1.0, 1.0}, 0.85);
        Rng rng(101);
        const QTable q = random_qtable(rng, 5, 3, -10.0, 10.0);
        const QTable out = apply_optimality_q(m, q);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(out.at(s, a) ==
                      doctest::Approx(oracle::optimality_q_entry(m, q, s, a))
                          .epsilon(1e-12));
    }
    SUBCASE("rejects mismatched shapes") {
        const Mdp m = random_mdp(1, 3, 2, {-1.0, 1.0});
        CHECK_THROWS_AS(apply_optimality_q(m, QTable::dense(4, 2)),
                        std::invalid_argument);
    }
}

TEST_CASE("apply_expectation_q") {
    SUBCASE("greedy policy recovers the optimality operator exactly") {
        const Mdp m = random_mdp(13, 6, 3, {-1.0, 1.0}, 0.9);
        Rng rng(102);
        const QTable q = random_qtable(rng, 6, 3, -10.0, 10.0);
        const QTable via_greedy = apply_expectation_q(m, greedy_policy(q), q);
        const QTable via_max = apply_optimality_q(m, q);
        for (int s = 0; s < 6; ++s)
            for (int a = 0; a < 3; ++a) CHECK(via_greedy.at(s, a) == via_max.at(s, a));
    }
    SUBCASE("gamma = 0 reduces to r(s,a)") {
        const Mdp m = random_mdp(17, 4, 2, {-2.0, 2.0}, 0.0);
        const QTable out = apply_expectation_q(m, Policy::uniform(4, 2), QTable::dense(4, 2));
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < 2; ++a)
                CHECK(out.at(s, a) == doctest::Approx(reward_sa(m, s, a)).epsilon(1e-12));
    }
    SUBCASE("matches the brute-force oracle") {
        const Mdp m = random_mdp(19, 5, 3, {-1.0, 1.0}, 0.8);
        Rng rng(103);
        const QTable q = random_qtable(rng, 5, 3, -10.0, 10.0);
        const Policy pi = random_policy(rng, 5, 3);
        const QTable out = apply_expectation_q(m, pi, q);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(out.at(s, a) ==
                      doctest::Approx(oracle::expectation_q_entry(m, pi, q, s, a))
                          .epsilon(1e-12));
    }
}

TEST_CASE("apply_consistent") {
    SUBCASE("coincides with the optimality operator without self-transitions") {
        const Mdp m = random_mdp_without_self_transitions(23, 6, 3, {-1.0, 1.0}, 0.9);
        Rng rng(104);
        const QTable q = random_qtable(rng, 6, 3, -10.0, 10.0);
        const QTable consistent = apply_consistent(m, q);
        const QTable classical = apply_optimality_q(m, q);
        for (int s = 0; s < 6; ++s)
            for (int a = 0; a < 3; ++a) CHECK(consistent.at(s, a) == classical.at(s, a));
    }
    SUBCASE("absorbing state becomes a per-action linear recursion") {
        const Mdp m = absorbing_mdp({2.0, 2.0}, 0.5);
        Rng rng(105);
        const QTable q = random_qtable(rng, 1, 2, -5.0, 5.0);
        const QTable out = apply_consistent(m, q);
        for (int a = 0; a < 2; ++a)
            CHECK(out.at(0, a) == doctest::Approx(2.0 + 0.5 * q.at(0, a)).epsilon(1e-12));
        // Fixed point r / (1 - gamma) for every action.
        QTable fixed = QTable::dense(1, 2, 4.0);
        const QTable image = apply_consistent(m, fixed);
        for (int a = 0; a < 2; ++a) CHECK(image.at(0, a) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("matches the brute-force oracle on self-loop instances") {
        const Mdp m = random_mdp(29, 5, 3, {-1.0, 1.0}, 0.9);
        Rng rng(106);
        const QTable q = random_qtable(rng, 5, 3, -10.0, 10.0);
        const QTable out = apply_consistent(m, q);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(out.at(s, a) ==
                      doctest::Approx(oracle::consistent_entry(m, q, s, a)).epsilon(1e-12));
    }
}

TEST_CASE("apply_advantage") {
    const Mdp m = random_mdp(31, 5, 3, {-1.0, 1.0}, 0.9);
    Rng rng(107);
    const QTable q = random_qtable(rng, 5, 3, -10.0, 10.0);
    const Policy pi = random_policy(rng, 5, 3);

    SUBCASE("beta = 0 equals the expectation operator bit-for-bit") {
        const QTable a = apply_advantage(m, pi, q, 0.0);
        const QTable e = apply_expectation_q(m, pi, q);
        REQUIRE(a.dense_values().size() == e.dense_values().size());
        CHECK(std::memcmp(a.dense_values().data(), e.dense_values().data(),
                          a.dense_values().size() * sizeof(double)) == 0);
    }
    SUBCASE("greedy policy makes the advantage term nonpositive") {
        const Policy greedy = greedy_policy(q);
        const QTable a = apply_advantage(m, greedy, q, 0.4);
        const QTable e = apply_expectation_q(m, greedy, q);
        for (int s = 0; s < 5; ++s) {
            for (int x = 0; x < 3; ++x) CHECK(a.at(s, x) <= e.at(s, x) + 1e-12);
            const int best = q.row_argmax(s);
            CHECK(a.at(s, best) == doctest::Approx(e.at(s, best)).epsilon(1e-12));
        }
    }
    SUBCASE("matches the brute-force oracle at beta = 0.3") {
        const QTable out = apply_advantage(m, pi, q, 0.3);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(out.at(s, a) ==
                      doctest::Approx(oracle::advantage_entry(m, pi, q, 0.3, s, a))
                          .epsilon(1e-12));
    }
}

TEST_CASE("operator kind validation") {
    CHECK_THROWS_AS(validate(OperatorKind{OperatorTag::expectation_q, {}, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(OperatorKind{OperatorTag::optimality_q,
                                          Policy::uniform(2, 2), 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(OperatorKind{OperatorTag::advantage_q,
                                          Policy::uniform(2, 2), -0.5}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate(OperatorKind::advantage_q(Policy::uniform(2, 2), 0.5)));
}

TEST_CASE("operator tag strings round-trip") {
    for (OperatorTag tag : {OperatorTag::optimality_v, OperatorTag::optimality_q,
                            OperatorTag::expectation_q, OperatorTag::consistent_q,
                            OperatorTag::advantage_q})
        CHECK(operator_tag_from_string(to_string(tag)) == tag);
    CHECK_FALSE(operator_tag_from_string("nonsense").has_value());
}

TEST_CASE("beta schedules") {
    SUBCASE("geometric values and partial-sum bound") {
        const BetaSchedule s = BetaSchedule::geometric(0.9, 0.5);
        CHECK(s.at(0) == 0.9);
        double partial = 0.0;
        for (int j = 0; j <= 50; ++j) partial += s.at(j);
        CHECK(partial <= 1.8);
        CHECK(s.sum_bound() == doctest::Approx(1.8).epsilon(1e-12));
    }
    SUBCASE("inverse-square partial sums stay below pi^2/6") {
        const BetaSchedule s = BetaSchedule::inverse_square(1.0);
        double partial = 0.0;
        double previous = s.at(0);
        for (std::int64_t j = 0; j < 1000000; ++j) {
            const double value = s.at(j);
            CHECK(value <= previous);
            previous = value;
            partial += value;
            if (partial > s.sum_bound()) break;
        }
        CHECK(partial <= 1.6449340668482264);
    }
    SUBCASE("decay index witness") {
        const BetaSchedule g = BetaSchedule::geometric(0.9, 0.999);
        const std::int64_t j = g.first_index_below(1e-6);
        CHECK(g.at(j) < 1e-6);
        if (j > 0) CHECK(g.at(j - 1) >= 1e-6);
        const BetaSchedule inv = BetaSchedule::inverse_square(2.0);
        const std::int64_t k = inv.first_index_below(1e-8);
        CHECK(inv.at(k) < 1e-8);
        if (k > 0) CHECK(inv.at(k - 1) >= 1e-8);
    }
    SUBCASE("text form round-trips") {
        const BetaSchedule g = BetaSchedule::parse("geometric:0.9:0.999");
        CHECK(g.family() == BetaSchedule::Family::geometric);
        CHECK(g.beta0() == 0.9);
        CHECK(g.lambda() == 0.999);
        const BetaSchedule inv = BetaSchedule::parse("invsq:0.25");
        CHECK(inv.family() == BetaSchedule::Family::inverse_square);
        CHECK(inv.beta0() == 0.25);
        CHECK_THROWS_AS(BetaSchedule::parse("linear:1"), std::invalid_argument);
        CHECK_THROWS_AS(BetaSchedule::parse("geometric:0.5:1.5"), std::invalid_argument);
    }
}

TEST_CASE("contraction and monotonicity spot checks") {
    Rng rng(200);
    for (int round = 0; round < 200; ++round) {
        const Mdp m = random_mdp(rng.next_u64(), 5, 3, {-1.0, 1.0},
                                 rng.uniform(0.1, 0.95));
        const QTable u = random_qtable(rng, 5, 3, -100.0, 100.0);
        const QTable v = random_qtable(rng, 5, 3, -100.0, 100.0);
        const Policy pi = random_policy(rng, 5, 3);

        const double bound = m.gamma * sup_norm_distance(u, v) + 1e-10;
        CHECK(sup_norm_distance(apply_optimality_q(m, u), apply_optimality_q(m, v)) <=
              bound);
        CHECK(sup_norm_distance(apply_expectation_q(m, pi, u),
                                apply_expectation_q(m, pi, v)) <= bound);
        CHECK(sup_norm_distance(apply_consistent(m, u), apply_consistent(m, v)) <=
              bound);

        // Monotonicity: lift u by a nonnegative perturbation.
        QTable above = QTable::dense(5, 3);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                above.set(s, a, u.at(s, a) + rng.uniform(0.0, 50.0));
        const QTable tu = apply_optimality_q(m, u);
        const QTable tv = apply_optimality_q(m, above);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a) CHECK(tu.at(s, a) <= tv.at(s, a) + 1e-12);
    }
}

TEST_CASE("optimality operator shift covariance") {
    Rng rng(300);
    const Mdp m = random_mdp(37, 5, 3, {-1.0, 1.0}, 0.9);
    for (int round = 0; round < 20; ++round) {
        const QTable q = random_qtable(rng, 5, 3, -50.0, 50.0);
        const double c = rng.uniform(-20.0, 20.0);
        QTable shifted = QTable::dense(5, 3);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a) shifted.set(s, a, q.at(s, a) + c);
        const QTable lhs = apply_optimality_q(m, shifted);
        const QTable rhs = apply_optimality_q(m, q);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                CHECK(lhs.at(s, a) ==
                      doctest::Approx(rhs.at(s, a) + m.gamma * c).epsilon(1e-12));
    }
}

TEST_CASE("apply_operator dispatch matches the direct calls") {
    const Mdp m = random_mdp(41, 4, 3, {-1.0, 1.0}, 0.9);
    Rng rng(400);
    const QTable q = random_qtable(rng, 4, 3, -10.0, 10.0);
    const Policy pi = random_policy(rng, 4, 3);
    CHECK(tables_equal(apply_operator(OperatorKind::optimality_q(), m, q),
                       apply_optimality_q(m, q)));
    CHECK(tables_equal(apply_operator(OperatorKind::expectation_q(pi), m, q),
                       apply_expectation_q(m, pi, q)));
    CHECK(tables_equal(apply_operator(OperatorKind::consistent_q(), m, q),
                       apply_consistent(m, q)));
    CHECK(tables_equal(apply_operator(OperatorKind::advantage_q(pi, 0.3), m, q),
                       apply_advantage(m, pi, q, 0.3)));
    CHECK_THROWS_AS(apply_operator(OperatorKind::optimality_v(), m, q),
                    std::invalid_argument);
}
