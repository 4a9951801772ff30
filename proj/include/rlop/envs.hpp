#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace rlop {

class Rng;

using ContinuousState = std::vector<double>;

struct StepOutcome {
    ContinuousState next_state;
    double reward = 0.0;
    bool terminated = false; // reached a terminal condition of the dynamics
    bool truncated = false;  // cut by an external step cap (set by the driver)
};

/**
 * Uniform per-dimension binning over [lower, upper] with row-major
 * mixed-radix flattening (first dimension most significant). Out-of-range
 * values clamp into the boundary bins and the upper bound maps to the last
 * bin, so discretization is total.
 */
struct GridSpec {
    std::vector<int> bins;
    std::vector<double> lower;
    std::vector<double> upper;

    int dims() const { return static_cast<int>(bins.size()); }
    std::int64_t n_cells() const; // throws if the product leaves 64-bit range

    static GridSpec uniform(std::vector<int> bins, std::vector<double> lower,
                            std::vector<double> upper);
};

std::int64_t discretize(const ContinuousState& s, const GridSpec& g);
ContinuousState cell_center(std::int64_t cell, const GridSpec& g);

enum class EnvKind { mountain_car, cart_pole, acrobot };

// mountaincar | cartpole | acrobot
const char* to_string(EnvKind kind);
std::optional<EnvKind> env_from_string(std::string_view name);

// One deterministic transition of each system. Dynamics and constants follow
// the standard classic-control formulations; all randomness lives in the
// initial-state samplers below.

// s = (position, velocity), actions {0: left, 1: idle, 2: right}.
// Reward -1 every step; terminates at position >= 0.5.
StepOutcome mountain_car_step(const ContinuousState& s, int action);

// s = (cart position, cart velocity, pole angle, pole angular velocity),
// actions {0: push left, 1: push right}. Euler-integrated at 0.02 s.
// Reward +1 every step including the failure step; terminates when
// |angle| > 12 degrees or |position| > 2.4.
StepOutcome cart_pole_step(const ContinuousState& s, int action);

// s = (cos t1, sin t1, cos t2, sin t2, w1, w2), actions {0,1,2} mapping to
// torques {-1, 0, +1}. Fourth-order Runge-Kutta at dt = 0.2. Reward -1 per
// non-terminal step; terminates when -cos t1 - cos(t1 + t2) > 1.
StepOutcome acrobot_step(const ContinuousState& s, int action);

int env_state_dim(EnvKind kind);
int env_n_actions(EnvKind kind);

// The published grid resolutions (40x40, 150^4, 30^6) over the built-in
// discretization bounds.
GridSpec env_default_grid(EnvKind kind);
// Custom bin counts over the same built-in bounds.
GridSpec env_grid(EnvKind kind, const std::vector<int>& bins);

// Uniform draw over the conventional start region of each system.
ContinuousState env_initial_state(EnvKind kind, Rng& rng);

StepOutcome env_step(EnvKind kind, const ContinuousState& s, int action);

} // namespace rlop
