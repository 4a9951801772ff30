#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlop/qlearn.hpp"

namespace rlop {

/**
 * Per-timestep mean of the runs' cumulative-reward sequences for one agent
 * configuration. std_error carries the per-step standard error of the mean
 * (zero when runs == 1); it is informational output, nothing asserts on it.
 *
 * fingerprint hashes the full configuration including the operator variant;
 * base_fingerprint excludes the variant, so curves are comparable exactly
 * when their base fingerprints agree.
 */
struct LearningCurve {
    std::string operator_label;
    std::string env_label;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::int64_t runs = 0;
    std::uint64_t fingerprint = 0;
    std::uint64_t base_fingerprint = 0;
};

struct ExperimentPlan {
    EnvKind env = EnvKind::mountain_car;
    GridSpec grid;
    std::vector<AgentConfig> configs; // one per operator variant
    std::int64_t runs = 1;
    std::uint64_t master_seed = 0;
    int workers = 0; // <= 0 selects the hardware default
};

// Thrown when a training worker fails; carries how much work finished so the
// caller can emit a partial-results manifest.
struct MonteCarloAbort : std::runtime_error {
    MonteCarloAbort(const std::string& message, std::int64_t completed,
                    std::int64_t total)
        : std::runtime_error(message), completed_tasks(completed), total_tasks(total) {}
    std::int64_t completed_tasks = 0;
    std::int64_t total_tasks = 0;
};

// Executes runs x configs training runs on a bounded worker pool and
// aggregates one curve per config. Run i uses derive_seed(master_seed, i) for
// every config (common random numbers), so initial states are paired across
// operator variants. Results are identical for any worker count.
std::vector<LearningCurve> monte_carlo(const ExperimentPlan& plan);

// Header: step,<label...>[,<label>_se...]; one row per timestep; doubles use
// 17 significant digits. Re-exporting identical curves is byte-identical.
void export_csv(const std::vector<LearningCurve>& curves, const std::string& path,
                bool with_std_error = true);

// Reads back a file written by export_csv (mean columns only).
std::vector<LearningCurve> parse_csv(const std::string& path);

// Deterministic standalone SVG: one polyline per curve, axes, legend.
// Rejects an empty curve list before creating the file.
void render_plot(const std::vector<LearningCurve>& curves, const std::string& path);

// Key=value sidecar recording the software version, full configuration,
// seed-derivation rule and per-curve fingerprints; everything needed to
// reproduce curves byte-for-byte on the same build.
void write_manifest(const ExperimentPlan& plan, const std::vector<LearningCurve>& curves,
                    const std::string& path);

std::uint64_t config_fingerprint(const ExperimentPlan& plan, const AgentConfig& config);
std::uint64_t base_fingerprint(const ExperimentPlan& plan);

} // namespace rlop
