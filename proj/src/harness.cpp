#include "rlop/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "rlop/mdp_io.hpp"
#include "rlop/rng.hpp"
#include "rlop/version.hpp"

namespace rlop {

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

void append_grid(std::ostringstream& out, const GridSpec& grid) {
    out << "|grid=";
    for (std::size_t i = 0; i < grid.bins.size(); ++i)
        out << grid.bins[i] << ':' << format_double(grid.lower[i]) << ':'
            << format_double(grid.upper[i]) << ';';
}

std::string base_config_text(const ExperimentPlan& plan) {
    std::ostringstream out;
    const AgentConfig& c = plan.configs.front();
    out << "v=" << kVersion << "|env=" << to_string(plan.env);
    append_grid(out, plan.grid);
    out << "|runs=" << plan.runs << "|seed=" << plan.master_seed
        << "|alpha=" << format_double(c.alpha) << "|epsilon=" << format_double(c.epsilon)
        << "|gamma=" << format_double(c.gamma) << "|episode_cap=" << c.episode_cap
        << "|step_cap=" << c.step_cap
        << "|initial_q=" << format_double(c.initial_q)
        << "|epsilon_decay=" << format_double(c.epsilon_decay)
        << "|alpha_decay=" << format_double(c.alpha_decay);
    return out.str();
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.configs.empty()) throw std::invalid_argument("no agent configs given");
    if (plan.runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (plan.grid.dims() != env_state_dim(plan.env))
        throw std::invalid_argument("grid does not match the environment");
    const AgentConfig& first = plan.configs.front();
    for (const AgentConfig& c : plan.configs) {
        validate(c);
        // Curves are only comparable when everything but the operator matches.
        if (c.alpha != first.alpha || c.epsilon != first.epsilon ||
            c.gamma != first.gamma || c.episode_cap != first.episode_cap ||
            c.step_cap != first.step_cap || c.initial_q != first.initial_q ||
            c.epsilon_decay != first.epsilon_decay ||
            c.alpha_decay != first.alpha_decay)
            throw std::invalid_argument(
                "agent configs may differ only in operator variant and beta");
    }
}

} // namespace

std::uint64_t base_fingerprint(const ExperimentPlan& plan) {
    return fnv1a(base_config_text(plan));
}

std::uint64_t config_fingerprint(const ExperimentPlan& plan, const AgentConfig& config) {
    std::ostringstream out;
    out << base_config_text(plan) << "|variant=" << to_string(config.variant);
    if (config.variant == UpdateVariant::advantage)
        out << "|beta=" << config.beta.to_string();
    return fnv1a(out.str());
}

std::vector<LearningCurve> monte_carlo(const ExperimentPlan& plan) {
    validate_plan(plan);
    const std::int64_t n_configs = static_cast<std::int64_t>(plan.configs.size());
    const std::int64_t total_tasks = n_configs * plan.runs;

    std::vector<std::vector<RunRecord>> records(
        static_cast<std::size_t>(n_configs),
        std::vector<RunRecord>(static_cast<std::size_t>(plan.runs)));

    int workers = plan.workers;
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw == 0 ? 1 : static_cast<int>(hw);
    }
    workers = static_cast<int>(
        std::min<std::int64_t>(workers, total_tasks));

    std::atomic<std::int64_t> next_task{0};
    std::atomic<std::int64_t> completed{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    auto work = [&](int worker_index) {
        try {
            while (true) {
                const std::int64_t task = next_task.fetch_add(1);
                if (task >= total_tasks) break;
                const std::int64_t config_index = task / plan.runs;
                const std::int64_t run_index = task % plan.runs;
                const std::uint64_t run_seed =
                    derive_seed(plan.master_seed, static_cast<std::uint64_t>(run_index));
                TrainResult result =
                    run_training(plan.env, plan.grid,
                                 plan.configs[static_cast<std::size_t>(config_index)],
                                 run_seed);
                records[static_cast<std::size_t>(config_index)]
                       [static_cast<std::size_t>(run_index)] = std::move(result.record);
                completed.fetch_add(1);
            }
        } catch (...) {
            errors[static_cast<std::size_t>(worker_index)] = std::current_exception();
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& thread : pool) thread.join();
    }

    for (const auto& error : errors) {
        if (error) {
            std::string message = "training worker failed";
            try {
                std::rethrow_exception(error);
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            throw MonteCarloAbort(message, completed.load(), total_tasks);
        }
    }

    // Deterministic reduction in run-index order, independent of scheduling.
    std::vector<LearningCurve> curves;
    curves.reserve(static_cast<std::size_t>(n_configs));
    for (std::int64_t c = 0; c < n_configs; ++c) {
        const AgentConfig& config = plan.configs[static_cast<std::size_t>(c)];
        const auto& config_records = records[static_cast<std::size_t>(c)];
        const std::size_t length = config_records.front().cumulative_reward.size();

        LearningCurve curve;
        curve.operator_label = to_string(config.variant);
        curve.env_label = to_string(plan.env);
        curve.runs = plan.runs;
        curve.fingerprint = config_fingerprint(plan, config);
        curve.base_fingerprint = base_fingerprint(plan);
        curve.mean.assign(length, 0.0);
        curve.std_error.assign(length, 0.0);

        for (std::int64_t r = 0; r < plan.runs; ++r) {
            const auto& sequence =
                config_records[static_cast<std::size_t>(r)].cumulative_reward;
            for (std::size_t t = 0; t < length; ++t) curve.mean[t] += sequence[t];
        }
        for (std::size_t t = 0; t < length; ++t) curve.mean[t] /= plan.runs;

        if (plan.runs > 1) {
            for (std::int64_t r = 0; r < plan.runs; ++r) {
                const auto& sequence =
                    config_records[static_cast<std::size_t>(r)].cumulative_reward;
                for (std::size_t t = 0; t < length; ++t) {
                    const double dev = sequence[t] - curve.mean[t];
                    curve.std_error[t] += dev * dev;
                }
            }
            const double denom = static_cast<double>(plan.runs - 1) * plan.runs;
            for (std::size_t t = 0; t < length; ++t)
                curve.std_error[t] = std::sqrt(curve.std_error[t] / denom);
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

void export_csv(const std::vector<LearningCurve>& curves, const std::string& path,
                bool with_std_error) {
    if (curves.empty()) throw std::invalid_argument("no curves to export");
    const std::size_t length = curves.front().mean.size();
    for (const auto& curve : curves) {
        if (curve.mean.size() != length)
            throw std::invalid_argument("curves have unequal length");
        if (curve.base_fingerprint != curves.front().base_fingerprint)
            throw std::invalid_argument("curves come from different experiment setups");
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "step";
    for (const auto& curve : curves) out << ',' << curve.operator_label;
    if (with_std_error)
        for (const auto& curve : curves) out << ',' << curve.operator_label << "_se";
    out << '\n';
    for (std::size_t t = 0; t < length; ++t) {
        out << (t + 1);
        for (const auto& curve : curves) out << ',' << format_double(curve.mean[t]);
        if (with_std_error)
            for (const auto& curve : curves)
                out << ',' << format_double(curve.std_error[t]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<LearningCurve> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);

    std::vector<std::string> labels;
    {
        std::istringstream header(line);
        std::string field;
        std::getline(header, field, ','); // "step"
        while (std::getline(header, field, ',')) labels.push_back(field);
    }
    // Mean columns come first; _se columns (if present) trail them.
    std::size_t n_means = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].size() > 3 && labels[i].substr(labels[i].size() - 3) == "_se") {
            n_means = i;
            break;
        }
    }
    std::vector<LearningCurve> curves(n_means);
    for (std::size_t i = 0; i < n_means; ++i) curves[i].operator_label = labels[i];

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ','); // step index
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!std::getline(row, field, ','))
                throw std::runtime_error("short csv row in " + path);
            if (i < n_means) curves[i].mean.push_back(std::stod(field));
        }
    }
    return curves;
}

namespace {

std::string svg_coord(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", x);
    return buffer;
}

std::string svg_label(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", x);
    return buffer;
}

const char* curve_color(const std::string& label, std::size_t index) {
    if (label == "classical") return "#1f77b4";
    if (label == "consistent") return "#2ca02c";
    if (label == "advantage") return "#d62728";
    static const char* palette[] = {"#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[index % 4];
}

} // namespace

void render_plot(const std::vector<LearningCurve>& curves, const std::string& path) {
    if (curves.empty()) throw std::invalid_argument("no curves to plot");
    const std::size_t length = curves.front().mean.size();
    if (length == 0) throw std::invalid_argument("curves are empty");
    for (const auto& curve : curves)
        if (curve.mean.size() != length)
            throw std::invalid_argument("curves have unequal length");

    double y_min = curves.front().mean.front();
    double y_max = y_min;
    for (const auto& curve : curves)
        for (double v : curve.mean) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    if (y_min == y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double width = 960.0, height = 600.0;
    const double left = 80.0, right = 930.0, top = 30.0, bottom = 550.0;
    auto x_of = [&](double t) {
        return left + (right - left) * (t - 1.0) / std::max<double>(1.0, length - 1.0);
    };
    auto y_of = [&](double v) {
        return bottom - (bottom - top) * (v - y_min) / (y_max - y_min);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";

    // Axes and ticks.
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double t = 1.0 + (length - 1.0) * tick / 5.0;
        const double x = x_of(t);
        out << "<line x1=\"" << svg_coord(x) << "\" y1=\"" << bottom << "\" x2=\""
            << svg_coord(x) << "\" y2=\"" << bottom + 6 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << svg_coord(x) << "\" y=\"" << bottom + 22
            << "\" font-size=\"13\" text-anchor=\"middle\">" << svg_label(t)
            << "</text>\n";
        const double v = y_min + (y_max - y_min) * tick / 5.0;
        const double y = y_of(v);
        out << "<line x1=\"" << left - 6 << "\" y1=\"" << svg_coord(y) << "\" x2=\""
            << left << "\" y2=\"" << svg_coord(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 10 << "\" y=\"" << svg_coord(y + 4)
            << "\" font-size=\"13\" text-anchor=\"end\">" << svg_label(v)
            << "</text>\n";
    }
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 40
        << "\" font-size=\"14\" text-anchor=\"middle\">timestep</text>\n";
    out << "<text x=\"20\" y=\"" << (top + bottom) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (top + bottom) / 2 << ")\">mean cumulative reward</text>\n";

    // One polyline per curve, long series thinned with a fixed stride.
    const std::size_t stride = std::max<std::size_t>(1, length / 1200);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        out << "<polyline fill=\"none\" stroke=\""
            << curve_color(curve.operator_label, c) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < length; t += stride)
            out << svg_coord(x_of(static_cast<double>(t + 1))) << ','
                << svg_coord(y_of(curve.mean[t])) << ' ';
        out << svg_coord(x_of(static_cast<double>(length))) << ','
            << svg_coord(y_of(curve.mean[length - 1]));
        out << "\"/>\n";
    }

    // Legend.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const double y = top + 18.0 * static_cast<double>(c) + 10.0;
        out << "<line x1=\"" << right - 150 << "\" y1=\"" << svg_coord(y) << "\" x2=\""
            << right - 120 << "\" y2=\"" << svg_coord(y) << "\" stroke=\""
            << curve_color(curves[c].operator_label, c) << "\" stroke-width=\"2\"/>\n";
        out << "<text class=\"legend-entry\" x=\"" << right - 112 << "\" y=\""
            << svg_coord(y + 4) << "\" font-size=\"13\">" << curves[c].operator_label
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const ExperimentPlan& plan, const std::vector<LearningCurve>& curves,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "version=" << kVersion << '\n';
    out << "env=" << to_string(plan.env) << '\n';
    out << "grid_bins=";
    for (std::size_t i = 0; i < plan.grid.bins.size(); ++i)
        out << (i ? "," : "") << plan.grid.bins[i];
    out << '\n';
    out << "grid_lower=";
    for (std::size_t i = 0; i < plan.grid.lower.size(); ++i)
        out << (i ? "," : "") << format_double(plan.grid.lower[i]);
    out << '\n';
    out << "grid_upper=";
    for (std::size_t i = 0; i < plan.grid.upper.size(); ++i)
        out << (i ? "," : "") << format_double(plan.grid.upper[i]);
    out << '\n';
    out << "runs=" << plan.runs << '\n';
    out << "master_seed=" << plan.master_seed << '\n';
    out << "seed_rule=run i uses derive_seed(master_seed, i) across all variants\n";
    const AgentConfig& c = plan.configs.front();
    out << "alpha=" << format_double(c.alpha) << '\n';
    out << "epsilon=" << format_double(c.epsilon) << '\n';
    out << "gamma=" << format_double(c.gamma) << '\n';
    out << "episode_cap=" << c.episode_cap << '\n';
    out << "step_cap=" << c.step_cap << '\n';
    out << "initial_q=" << format_double(c.initial_q) << '\n';
    out << "epsilon_decay=" << format_double(c.epsilon_decay) << '\n';
    out << "alpha_decay=" << format_double(c.alpha_decay) << '\n';
    out << "base_fingerprint=" << base_fingerprint(plan) << '\n';
    for (std::size_t i = 0; i < plan.configs.size(); ++i) {
        const AgentConfig& config = plan.configs[i];
        out << "operator." << i << "=" << to_string(config.variant);
        if (config.variant == UpdateVariant::advantage)
            out << " beta=" << config.beta.to_string();
        out << " fingerprint=" << config_fingerprint(plan, config) << '\n';
    }
    for (const auto& curve : curves)
        out << "curve." << curve.operator_label << ".final="
            << format_double(curve.mean.empty() ? 0.0 : curve.mean.back()) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rlop
