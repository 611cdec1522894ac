/**
 * @file harness.hpp
 * @brief Scenario runs, sampling-period sweeps, the fine-step continuous
 *        reference, and CSV/JSON serialization.
 */
#pragma once

#include "fter/metrics.hpp"
#include "fter/signals.hpp"
#include "fter/simulation.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fter {

struct RunSpec {
    int scenario = 1;
    std::optional<SignalModel> signal;  // overrides the scenario's signal when set
    std::vector<Method> methods{Method::FterD, Method::FterE, Method::FterI};
    Config cfg = preset_config(25.0, 0.1);
    double t_end = 25;
    std::uint64_t seed = 0;
    double t_min = 10;
    std::optional<double> t_max;  // defaults to t_end
    MDefinition m_definition = MDefinition::RMS;
    std::string out_dir = ".";
    std::optional<double> oracle_step;

    double window_max() const { return t_max.value_or(t_end); }
    SignalModel signal_model() const;
    void validate() const;
};

/// Preset for scenarios 1..3: n = 3, nf = 2, m = 5 gains, tau = 0.1.
RunSpec preset_run_spec(int scenario);

/// Applies the keys of a JSON config on top of `base`.
RunSpec run_spec_from_json(const nlohmann::json& j, RunSpec base);
RunSpec run_spec_from_json(const nlohmann::json& j);

struct RunResult {
    std::vector<ErrorTrace> traces;
    MetricsTable table;
    std::optional<ErrorTrace> oracle;
};

/// Runs every method and tabulates metrics. No files are written.
RunResult execute_run(const RunSpec& spec);

/**
 * execute_run plus files in spec.out_dir: trace_<method>.csv per method,
 * trace_oracle.csv when an oracle step is set, metrics.csv and metrics.json.
 * Traces are written before metrics are computed, so an empty window still
 * leaves the traces on disk before EmptyWindowError propagates.
 */
RunResult run_scenario(const RunSpec& spec);

/**
 * Forward-stepping integration of the continuous filtering differentiator with
 * step <= tau/100, sampled at multiples of tau. Gaussian draws are held over
 * each sampling interval; the smooth signal and cosine noise are evaluated at
 * the fine times.
 */
ErrorTrace continuous_oracle(const RunSpec& spec, double fine_step);

enum class SweepSpacing { Linear, Log };

struct SweepSpec {
    double tau_min = 1e-4;
    double tau_max = 1.0;
    SweepSpacing spacing = SweepSpacing::Log;
    double step = 1e-4;  // linear spacing
    int points = 10;     // log spacing
    RunSpec base = preset_run_spec(3);

    void validate() const;
};

/// The full linear grid: tau = 1e-4, 2e-4, .., 1.
SweepSpec full_grid_sweep(RunSpec base);

std::vector<double> tau_grid(const SweepSpec& spec);

struct SweepRow {
    double tau = 0;
    Method method = Method::FterD;
    Eigen::VectorXd Y;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

/// One row per (tau, method), in grid order then method order. Failed runs keep NaN Y.
std::vector<SweepRow> sweep_tau(const SweepSpec& spec);

std::string format_double(double v);

void write_trace_csv(std::ostream& os, const ErrorTrace& trace);
void write_metrics_csv(std::ostream& os, const MetricsTable& table);
nlohmann::json metrics_json(const MetricsTable& table);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, int n);

/// Human-readable table, one column per method.
std::string format_table(const MetricsTable& table);

std::string trace_file_name(const std::string& method);

}  // namespace fter
