#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "rlop/envs.hpp"
#include "rlop/rng.hpp"

using namespace rlop;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent acrobot integrator for the cross-check: generic RK4 over a
// std::array with a free-function derivative, written against the published
// equations separately from the library's version.
namespace alt {

std::array<double, 4> derivative(const std::array<double, 4>& s, double torque) {
    const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
    const double g = 9.8;
    const double d1 = 1.0 * 0.25 + 1.0 * (1.0 + 0.25 + 2.0 * 0.5 * std::cos(t2)) + 2.0;
    const double d2 = 1.0 * (0.25 + 0.5 * std::cos(t2)) + 1.0;
    const double phi2 = 1.0 * 0.5 * g * std::cos(t1 + t2 - kPi / 2.0);
    const double phi1 = -0.5 * w2 * w2 * std::sin(t2) - w2 * w1 * std::sin(t2) +
                        (0.5 + 1.0) * g * std::cos(t1 - kPi / 2.0) + phi2;
    const double a2 = (torque + d2 / d1 * phi1 - 0.5 * w1 * w1 * std::sin(t2) - phi2) /
                      (0.25 + 1.0 - d2 * d2 / d1);
    const double a1 = -(d2 * a2 + phi1) / d1;
    return {w1, w2, a1, a2};
}

std::array<double, 4> rk4(const std::array<double, 4>& y0, double torque, double h) {
    auto add = [](std::array<double, 4> a, const std::array<double, 4>& b, double c) {
        for (int i = 0; i < 4; ++i) a[i] += c * b[i];
        return a;
    };
    const auto k1 = derivative(y0, torque);
    const auto k2 = derivative(add(y0, k1, h / 2), torque);
    const auto k3 = derivative(add(y0, k2, h / 2), torque);
    const auto k4 = derivative(add(y0, k3, h), torque);
    std::array<double, 4> y1 = y0;
    for (int i = 0; i < 4; ++i)
        y1[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y1;
}

std::array<double, 4> unpack(const ContinuousState& obs) {
    return {std::atan2(obs[1], obs[0]), std::atan2(obs[3], obs[2]), obs[4], obs[5]};
}

// Total mechanical energy of the two-link system (relative joint angles,
// zero at the pivot, angles measured from the downward vertical).
double energy(const std::array<double, 4>& s) {
    const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
    const double g = 9.8, m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5;
    const double i1 = 1.0, i2 = 1.0;
    const double v2 = w1 + w2; // absolute angular velocity of link 2
    const double kinetic =
        0.5 * (m1 * lc1 * lc1 + i1) * w1 * w1 +
        0.5 * m2 *
            (l1 * l1 * w1 * w1 + lc2 * lc2 * v2 * v2 +
             2.0 * l1 * lc2 * w1 * v2 * std::cos(t2)) +
        0.5 * i2 * v2 * v2;
    const double potential = -g * (m1 * lc1 * std::cos(t1) +
                                   m2 * (l1 * std::cos(t1) + lc2 * std::cos(t1 + t2)));
    return kinetic + potential;
}

} // namespace alt

// Independent cartpole step (same published equations, separate code path).
ContinuousState alt_cartpole(const ContinuousState& s, int action) {
    const double force = action == 1 ? 10.0 : -10.0;
    const double mc = 1.0, mp = 0.1, l = 0.5, g = 9.8, tau = 0.02;
    const double ct = std::cos(s[2]), st = std::sin(s[2]);
    const double temp = (force + mp * l * s[3] * s[3] * st) / (mc + mp);
    const double aa = (g * st - ct * temp) / (l * (4.0 / 3.0 - mp * ct * ct / (mc + mp)));
    const double xa = temp - mp * l * aa * ct / (mc + mp);
    return {s[0] + tau * s[1], s[1] + tau * xa, s[2] + tau * s[3], s[3] + tau * aa};
}

} // namespace

TEST_CASE("mountain_car_step") {
    SUBCASE("frozen midpoint update") {
        const StepOutcome out = mountain_car_step({-0.5, 0.0}, 1);
        CHECK(out.next_state[1] ==
              doctest::Approx(-0.00017684300416925727).epsilon(1e-15));
        CHECK(out.next_state[0] == doctest::Approx(-0.5001768430041692).epsilon(1e-15));
        CHECK(out.reward == -1.0);
        CHECK_FALSE(out.terminated);
    }
    SUBCASE("terminates at the goal with the final -1") {
        const StepOutcome out = mountain_car_step({0.49, 0.07}, 2);
        CHECK(out.terminated);
        CHECK(out.reward == -1.0);
        CHECK(out.next_state[0] >= 0.5);
    }
    SUBCASE("both force terms vanish at the cosine zero") {
        const StepOutcome out = mountain_car_step({-kPi / 6.0, 0.0}, 1);
        CHECK(std::abs(out.next_state[1]) < 1e-18);
    }
    SUBCASE("left wall zeroes negative velocity") {
        const StepOutcome out = mountain_car_step({-1.19, -0.07}, 0);
        CHECK(out.next_state[0] == -1.2);
        CHECK(out.next_state[1] == 0.0);
    }
    SUBCASE("rejects invalid actions") {
        CHECK_THROWS_AS(mountain_car_step({-0.5, 0.0}, 3), std::invalid_argument);
    }
}

TEST_CASE("cart_pole_step") {
    SUBCASE("stays near upright under alternating forces") {
        ContinuousState s{0.0, 0.0, 0.0, 0.0};
        for (int t = 0; t < 8; ++t) {
            const StepOutcome out = cart_pole_step(s, t % 2);
            CHECK_FALSE(out.terminated);
            s = out.next_state;
            CHECK(std::abs(s[2]) < 0.05);
        }
    }
    SUBCASE("matches an independently coded integrator") {
        ContinuousState a{0.01, -0.02, 0.03, 0.01};
        ContinuousState b = a;
        Rng rng(7);
        for (int t = 0; t < 50; ++t) {
            const int action = rng.uniform_int(0, 1);
            a = cart_pole_step(a, action).next_state;
            b = alt_cartpole(b, action);
            for (int i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        }
    }
    SUBCASE("terminates just past the 12-degree threshold") {
        const StepOutcome out = cart_pole_step({0.0, 0.0, 0.21, 0.0}, 1);
        CHECK(out.terminated);
        CHECK(out.reward == 1.0); // reward also on the failure step
    }
    SUBCASE("terminates past the track limit") {
        const StepOutcome out = cart_pole_step({2.39, 3.0, 0.0, 0.0}, 1);
        CHECK(out.terminated);
    }
}

TEST_CASE("acrobot_step") {
    SUBCASE("hanging rest state is an equilibrium") {
        const ContinuousState rest{1.0, 0.0, 1.0, 0.0, 0.0, 0.0};
        const StepOutcome out = acrobot_step(rest, 1);
        for (int i = 0; i < 6; ++i)
            CHECK(out.next_state[i] == doctest::Approx(rest[i]).epsilon(1e-12));
        CHECK_FALSE(out.terminated);
        CHECK(out.reward == -1.0);
    }
    SUBCASE("terminates above the target height") {
        // theta1 = 2.6 puts the tip height at 2*(-cos 2.6) ~ 1.71 > 1.
        const ContinuousState high{std::cos(2.6), std::sin(2.6), 1.0, 0.0, 0.0, 0.0};
        const StepOutcome out = acrobot_step(high, 1);
        CHECK(out.terminated);
        CHECK(out.reward == 0.0); // the step reaching the target is not penalized
    }
    SUBCASE("matches an independently coded integrator over 100 steps") {
        ContinuousState obs{std::cos(0.05), std::sin(0.05), std::cos(-0.03),
                            std::sin(-0.03), 0.02, -0.01};
        std::array<double, 4> alt_state = alt::unpack(obs);
        Rng rng(11);
        for (int t = 0; t < 100; ++t) {
            const int action = rng.uniform_int(0, 2);
            obs = acrobot_step(obs, action).next_state;
            alt_state = alt::rk4(alt_state, action - 1, 0.2);
            // Compare in observation space (the library wraps angles).
            CHECK(obs[0] == doctest::Approx(std::cos(alt_state[0])).epsilon(1e-9));
            CHECK(obs[1] == doctest::Approx(std::sin(alt_state[0])).epsilon(1e-9));
            CHECK(obs[2] == doctest::Approx(std::cos(alt_state[1])).epsilon(1e-9));
            CHECK(obs[3] == doctest::Approx(std::sin(alt_state[1])).epsilon(1e-9));
            CHECK(obs[4] == doctest::Approx(alt_state[2]).epsilon(1e-9));
            CHECK(obs[5] == doctest::Approx(alt_state[3]).epsilon(1e-9));
            if (std::abs(alt_state[2]) > 4.0 * kPi || std::abs(alt_state[3]) > 9.0 * kPi)
                break; // clamping would diverge from the unclamped oracle
        }
    }
    SUBCASE("zero-torque energy drift stays below 1e-3 relative over 1000 steps") {
        ContinuousState obs{std::cos(0.02), std::sin(0.02), 1.0, 0.0, 0.0, 0.0};
        const double initial = alt::energy(alt::unpack(obs));
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            obs = acrobot_step(obs, 1).next_state; // torque 0
            const double drift = std::abs(alt::energy(alt::unpack(obs)) - initial);
            worst = std::max(worst, drift);
        }
        CHECK(worst / std::abs(initial) < 1e-3);
    }
}

TEST_CASE("environment steps are deterministic") {
    Rng rng(13);
    for (EnvKind kind : {EnvKind::mountain_car, EnvKind::cart_pole, EnvKind::acrobot}) {
        const ContinuousState s = env_initial_state(kind, rng);
        const StepOutcome a = env_step(kind, s, 0);
        const StepOutcome b = env_step(kind, s, 0);
        CHECK(a.next_state == b.next_state);
        CHECK(a.reward == b.reward);
        CHECK(a.terminated == b.terminated);
    }
}

TEST_CASE("discretize") {
    const GridSpec grid = env_grid(EnvKind::mountain_car, {40, 40});
    SUBCASE("lower corner maps to cell 0") {
        CHECK(discretize({-1.2, -0.07}, grid) == 0);
    }
    SUBCASE("upper corner maps to the last cell") {
        CHECK(discretize({0.6, 0.07}, grid) == 40 * 40 - 1);
    }
    SUBCASE("midpoint matches the independent flattening oracle") {
        const std::int64_t cell = discretize({-0.3, 0.0}, grid);
        CHECK(cell == 820);
        CHECK(cell == oracle::flatten({40, 40}, {20, 20}));
    }
    SUBCASE("out-of-range values clamp into the boundary bins") {
        CHECK(discretize({-5.0, 0.1}, grid) == discretize({-1.2, 0.07}, grid));
    }
    SUBCASE("bin centers round-trip through every cell") {
        const GridSpec small = GridSpec::uniform({5, 4, 3}, {-1.0, 0.0, 2.0},
                                                 {1.0, 2.0, 5.0});
        for (std::int64_t cell = 0; cell < small.n_cells(); ++cell)
            CHECK(discretize(cell_center(cell, small), small) == cell);
    }
    SUBCASE("cell centers stay within half a bin width") {
        Rng rng(17);
        for (int round = 0; round < 200; ++round) {
            const ContinuousState s{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
            const ContinuousState center = cell_center(discretize(s, grid), grid);
            CHECK(std::abs(center[0] - s[0]) <= 0.5 * 1.8 / 40 + 1e-12);
            CHECK(std::abs(center[1] - s[1]) <= 0.5 * 0.14 / 40 + 1e-12);
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(discretize({0.0}, grid), std::invalid_argument);
    }
}

TEST_CASE("grid specs") {
    SUBCASE("published default grids") {
        CHECK(env_default_grid(EnvKind::mountain_car).n_cells() == 1600);
        CHECK(env_default_grid(EnvKind::cart_pole).n_cells() == 506250000LL);
        CHECK(env_default_grid(EnvKind::acrobot).n_cells() == 729000000LL);
    }
    SUBCASE("cell-count overflow is rejected") {
        CHECK_THROWS_AS(GridSpec::uniform({1 << 20, 1 << 20, 1 << 20, 1 << 11},
                                          {0, 0, 0, 0}, {1, 1, 1, 1}),
                        std::overflow_error);
    }
    SUBCASE("bad bounds are rejected") {
        CHECK_THROWS_AS(GridSpec::uniform({4}, {1.0}, {1.0}), std::invalid_argument);
        CHECK_THROWS_AS(GridSpec::uniform({0}, {0.0}, {1.0}), std::invalid_argument);
    }
    SUBCASE("environment grids validate dimension counts") {
        CHECK_THROWS_AS(env_grid(EnvKind::cart_pole, {10, 10}), std::invalid_argument);
    }
}

TEST_CASE("initial states stay inside the documented start regions") {
    Rng rng(19);
    for (int round = 0; round < 100; ++round) {
        const ContinuousState mc = env_initial_state(EnvKind::mountain_car, rng);
        CHECK(mc[0] >= -0.6);
        CHECK(mc[0] <= -0.4);
        CHECK(mc[1] == 0.0);
        const ContinuousState cp = env_initial_state(EnvKind::cart_pole, rng);
        for (double x : cp) CHECK(std::abs(x) <= 0.05);
        const ContinuousState ab = env_initial_state(EnvKind::acrobot, rng);
        CHECK(std::abs(std::atan2(ab[1], ab[0])) <= 0.1);
        CHECK(std::abs(ab[4]) <= 0.1);
    }
}

TEST_CASE("env string names round-trip") {
    for (EnvKind kind : {EnvKind::mountain_car, EnvKind::cart_pole, EnvKind::acrobot})
        CHECK(env_from_string(to_string(kind)) == kind);
    CHECK_FALSE(env_from_string("pendulum").has_value());
}
