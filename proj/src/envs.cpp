#include "rlop/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rlop/rng.hpp"

namespace rlop {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Wrap into [lo, hi).
double wrap(double x, double lo, double hi) {
    const double width = hi - lo;
    while (x >= hi) x -= width;
    while (x < lo) x += width;
    return x;
}

void require_dims(const ContinuousState& s, int want, const char* env) {
    if (static_cast<int>(s.size()) != want)
        throw std::invalid_argument(std::string(env) + ": state dimension mismatch");
}

void require_action(int action, int n, const char* env) {
    if (action < 0 || action >= n)
        throw std::invalid_argument(std::string(env) + ": invalid action index");
}

} // namespace

std::int64_t GridSpec::n_cells() const {
    std::int64_t total = 1;
    for (int b : bins) {
        if (b < 1) throw std::invalid_argument("bin counts must be >= 1");
        if (total > std::numeric_limits<std::int64_t>::max() / b)
            throw std::overflow_error("grid cell count leaves 64-bit range");
        total *= b;
    }
    return total;
}

GridSpec GridSpec::uniform(std::vector<int> bins, std::vector<double> lower,
                           std::vector<double> upper) {
    if (bins.size() != lower.size() || bins.size() != upper.size())
        throw std::invalid_argument("grid spec vectors must have equal length");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i] < 1) throw std::invalid_argument("bin counts must be >= 1");
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("grid bounds must satisfy lower < upper");
    }
    GridSpec g{std::move(bins), std::move(lower), std::move(upper)};
    g.n_cells(); // reject overflowing grids early
    return g;
}

std::int64_t discretize(const ContinuousState& s, const GridSpec& g) {
    if (static_cast<int>(s.size()) != g.dims())
        throw std::invalid_argument("state dimension does not match grid");
    std::int64_t index = 0;
    for (int d = 0; d < g.dims(); ++d) {
        const double lo = g.lower[static_cast<std::size_t>(d)];
        const double hi = g.upper[static_cast<std::size_t>(d)];
        const int n = g.bins[static_cast<std::size_t>(d)];
        const double x = clamp(s[static_cast<std::size_t>(d)], lo, hi);
        int bin = static_cast<int>(std::floor((x - lo) / (hi - lo) * n));
        bin = std::min(std::max(bin, 0), n - 1); // upper bound -> last bin
        index = index * n + bin;
    }
    return index;
}

ContinuousState cell_center(std::int64_t cell, const GridSpec& g) {
    if (cell < 0 || cell >= g.n_cells())
        throw std::out_of_range("cell index out of range");
    ContinuousState center(static_cast<std::size_t>(g.dims()));
    for (int d = g.dims() - 1; d >= 0; --d) {
        const int n = g.bins[static_cast<std::size_t>(d)];
        const int bin = static_cast<int>(cell % n);
        cell /= n;
        const double lo = g.lower[static_cast<std::size_t>(d)];
        const double hi = g.upper[static_cast<std::size_t>(d)];
        center[static_cast<std::size_t>(d)] = lo + (bin + 0.5) * (hi - lo) / n;
    }
    return center;
}

const char* to_string(EnvKind kind) {
    switch (kind) {
    case EnvKind::mountain_car: return "mountaincar";
    case EnvKind::cart_pole: return "cartpole";
    case EnvKind::acrobot: return "acrobot";
    }
    return "?";
}

std::optional<EnvKind> env_from_string(std::string_view name) {
    if (name == "mountaincar") return EnvKind::mountain_car;
    if (name == "cartpole") return EnvKind::cart_pole;
    if (name == "acrobot") return EnvKind::acrobot;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// MountainCar (Moore's car-on-the-hill, standard constants)

namespace mc {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
} // namespace mc

StepOutcome mountain_car_step(const ContinuousState& s, int action) {
    require_dims(s, 2, "mountaincar");
    require_action(action, 3, "mountaincar");
    double position = s[0];
    double velocity = s[1];

    velocity += (action - 1) * mc::kForce - std::cos(3.0 * position) * mc::kGravity;
    velocity = clamp(velocity, -mc::kMaxSpeed, mc::kMaxSpeed);
    position += velocity;
    position = clamp(position, mc::kMinPosition, mc::kMaxPosition);
    if (position <= mc::kMinPosition && velocity < 0.0) velocity = 0.0;

    StepOutcome out;
    out.next_state = {position, velocity};
    out.reward = -1.0;
    out.terminated = position >= mc::kGoalPosition;
    return out;
}

// ---------------------------------------------------------------------------
// CartPole (Barto-Sutton-Anderson system, standard constants)

namespace cp {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kAngleLimit = 12.0 * 2.0 * kPi / 360.0;
constexpr double kPositionLimit = 2.4;
} // namespace cp

StepOutcome cart_pole_step(const ContinuousState& s, int action) {
    require_dims(s, 4, "cartpole");
    require_action(action, 2, "cartpole");
    double x = s[0];
    double x_dot = s[1];
    double theta = s[2];
    double theta_dot = s[3];

    const double force = action == 1 ? cp::kForceMag : -cp::kForceMag;
    const double cos_theta = std::cos(theta);
    const double sin_theta = std::sin(theta);

    const double temp =
        (force + cp::kPoleMassLength * theta_dot * theta_dot * sin_theta) /
        cp::kTotalMass;
    const double theta_acc =
        (cp::kGravity * sin_theta - cos_theta * temp) /
        (cp::kHalfLength *
         (4.0 / 3.0 - cp::kMassPole * cos_theta * cos_theta / cp::kTotalMass));
    const double x_acc =
        temp - cp::kPoleMassLength * theta_acc * cos_theta / cp::kTotalMass;

    x += cp::kTau * x_dot;
    x_dot += cp::kTau * x_acc;
    theta += cp::kTau * theta_dot;
    theta_dot += cp::kTau * theta_acc;

    StepOutcome out;
    out.next_state = {x, x_dot, theta, theta_dot};
    out.reward = 1.0; // every step, including the failure step
    out.terminated =
        std::abs(x) > cp::kPositionLimit || std::abs(theta) > cp::kAngleLimit;
    return out;
}

// ---------------------------------------------------------------------------
// Acrobot (Sutton's two-link underactuated swing-up, standard constants)

namespace ab {
constexpr double kDt = 0.2;
constexpr double kLink1Length = 1.0;
constexpr double kLink1Mass = 1.0;
constexpr double kLink2Mass = 1.0;
constexpr double kLink1Com = 0.5;
constexpr double kLink2Com = 0.5;
constexpr double kLink1Moi = 1.0;
constexpr double kLink2Moi = 1.0;
constexpr double kGravity = 9.8;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;

struct Derivative {
    double d_theta1, d_theta2, d_omega1, d_omega2;
};

Derivative dynamics(const std::array<double, 4>& y, double torque) {
    const double theta1 = y[0], theta2 = y[1], omega1 = y[2], omega2 = y[3];
    const double m1 = kLink1Mass, m2 = kLink2Mass;
    const double l1 = kLink1Length;
    const double lc1 = kLink1Com, lc2 = kLink2Com;
    const double i1 = kLink1Moi, i2 = kLink2Moi;
    const double g = kGravity;

    const double d1 = m1 * lc1 * lc1 +
                      m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) +
                      i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
    const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
    const double phi1 =
        -m2 * l1 * lc2 * omega2 * omega2 * std::sin(theta2) -
        2.0 * m2 * l1 * lc2 * omega2 * omega1 * std::sin(theta2) +
        (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
    const double dd_theta2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * omega1 * omega1 * std::sin(theta2) -
         phi2) /
        (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double dd_theta1 = -(d2 * dd_theta2 + phi1) / d1;
    return {omega1, omega2, dd_theta1, dd_theta2};
}

std::array<double, 4> rk4_step(const std::array<double, 4>& y, double torque,
                               double dt) {
    auto scaled_add = [](const std::array<double, 4>& base, const Derivative& k,
                         double h) {
        return std::array<double, 4>{base[0] + h * k.d_theta1, base[1] + h * k.d_theta2,
                                     base[2] + h * k.d_omega1, base[3] + h * k.d_omega2};
    };
    const Derivative k1 = dynamics(y, torque);
    const Derivative k2 = dynamics(scaled_add(y, k1, dt / 2.0), torque);
    const Derivative k3 = dynamics(scaled_add(y, k2, dt / 2.0), torque);
    const Derivative k4 = dynamics(scaled_add(y, k3, dt), torque);
    return {y[0] + dt / 6.0 * (k1.d_theta1 + 2.0 * k2.d_theta1 + 2.0 * k3.d_theta1 +
                               k4.d_theta1),
            y[1] + dt / 6.0 * (k1.d_theta2 + 2.0 * k2.d_theta2 + 2.0 * k3.d_theta2 +
                               k4.d_theta2),
            y[2] + dt / 6.0 * (k1.d_omega1 + 2.0 * k2.d_omega1 + 2.0 * k3.d_omega1 +
                               k4.d_omega1),
            y[3] + dt / 6.0 * (k1.d_omega2 + 2.0 * k2.d_omega2 + 2.0 * k3.d_omega2 +
                               k4.d_omega2)};
}

} // namespace ab

StepOutcome acrobot_step(const ContinuousState& s, int action) {
    require_dims(s, 6, "acrobot");
    require_action(action, 3, "acrobot");
    const double torque = static_cast<double>(action - 1);

    std::array<double, 4> y{std::atan2(s[1], s[0]), std::atan2(s[3], s[2]), s[4], s[5]};
    y = ab::rk4_step(y, torque, ab::kDt);
    const double theta1 = wrap(y[0], -kPi, kPi);
    const double theta2 = wrap(y[1], -kPi, kPi);
    const double omega1 = clamp(y[2], -ab::kMaxVel1, ab::kMaxVel1);
    const double omega2 = clamp(y[3], -ab::kMaxVel2, ab::kMaxVel2);

    StepOutcome out;
    out.next_state = {std::cos(theta1), std::sin(theta1), std::cos(theta2),
                      std::sin(theta2), omega1, omega2};
    out.terminated = -std::cos(theta1) - std::cos(theta1 + theta2) > 1.0;
    out.reward = out.terminated ? 0.0 : -1.0;
    return out;
}

// ---------------------------------------------------------------------------

int env_state_dim(EnvKind kind) {
    switch (kind) {
    case EnvKind::mountain_car: return 2;
    case EnvKind::cart_pole: return 4;
    case EnvKind::acrobot: return 6;
    }
    return 0;
}

int env_n_actions(EnvKind kind) {
    switch (kind) {
    case EnvKind::mountain_car: return 3;
    case EnvKind::cart_pole: return 2;
    case EnvKind::acrobot: return 3;
    }
    return 0;
}

namespace {

// Discretization bounds. MountainCar's are the dynamics bounds; CartPole's
// velocity clipping ranges are a conventional choice (no canonical finite
// bound exists) and are recorded in experiment manifests.
GridSpec bounds_with_bins(EnvKind kind, const std::vector<int>& bins) {
    switch (kind) {
    case EnvKind::mountain_car:
        return GridSpec::uniform(bins, {mc::kMinPosition, -mc::kMaxSpeed},
                                 {mc::kMaxPosition, mc::kMaxSpeed});
    case EnvKind::cart_pole:
        return GridSpec::uniform(bins, {-cp::kPositionLimit, -3.0, -cp::kAngleLimit, -3.5},
                                 {cp::kPositionLimit, 3.0, cp::kAngleLimit, 3.5});
    case EnvKind::acrobot:
        return GridSpec::uniform(
            bins, {-1.0, -1.0, -1.0, -1.0, -ab::kMaxVel1, -ab::kMaxVel2},
            {1.0, 1.0, 1.0, 1.0, ab::kMaxVel1, ab::kMaxVel2});
    }
    throw std::invalid_argument("unknown environment");
}

} // namespace

GridSpec env_default_grid(EnvKind kind) {
    switch (kind) {
    case EnvKind::mountain_car: return bounds_with_bins(kind, {40, 40});
    case EnvKind::cart_pole: return bounds_with_bins(kind, {150, 150, 150, 150});
    case EnvKind::acrobot: return bounds_with_bins(kind, {30, 30, 30, 30, 30, 30});
    }
    throw std::invalid_argument("unknown environment");
}

GridSpec env_grid(EnvKind kind, const std::vector<int>& bins) {
    if (static_cast<int>(bins.size()) != env_state_dim(kind))
        throw std::invalid_argument("grid bin count does not match state dimension");
    return bounds_with_bins(kind, bins);
}

ContinuousState env_initial_state(EnvKind kind, Rng& rng) {
    switch (kind) {
    case EnvKind::mountain_car:
        return {rng.uniform(-0.6, -0.4), 0.0};
    case EnvKind::cart_pole:
        return {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    case EnvKind::acrobot: {
        const double theta1 = rng.uniform(-0.1, 0.1);
        const double theta2 = rng.uniform(-0.1, 0.1);
        const double omega1 = rng.uniform(-0.1, 0.1);
        const double omega2 = rng.uniform(-0.1, 0.1);
        return {std::cos(theta1), std::sin(theta1), std::cos(theta2),
                std::sin(theta2), omega1, omega2};
    }
    }
    throw std::invalid_argument("unknown environment");
}

StepOutcome env_step(EnvKind kind, const ContinuousState& s, int action) {
    switch (kind) {
    case EnvKind::mountain_car: return mountain_car_step(s, action);
    case EnvKind::cart_pole: return cart_pole_step(s, action);
    case EnvKind::acrobot: return acrobot_step(s, action);
    }
    throw std::invalid_argument("unknown environment");
}

} // namespace rlop
