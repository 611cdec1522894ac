/**
 * @file simulation.hpp
 * @brief Fixed-period simulation loop over a sampled signal.
 */
#pragma once

#include "fter/metrics.hpp"
#include "fter/signals.hpp"
#include "fter/steppers.hpp"

#include <functional>

namespace fter {

/// Number of steps K = floor(t_end / tau); samples are recorded for k = 0..K.
long step_count(double t_end, double tau);

/// Called once per recorded sample with the state at t_k (before stepping with g_k).
using StepObserver = std::function<void(const StepInput& in, const Eigen::VectorXd& stacked, double xi)>;

/**
 * Runs `method` from s0 over [0, t_end], invoking `observer` for every k.
 * Throws NumericalError carrying the failing step index on blow-up.
 */
void simulate(const Config& cfg, Method method, const SignalModel& signal, double t_end,
              const State& s0, const StepObserver& observer);

ErrorTrace run(const Config& cfg, Method method, const SignalModel& signal, double t_end,
               const State& s0);

inline ErrorTrace run(const Config& cfg, Method method, const SignalModel& signal, double t_end) {
    return run(cfg, method, signal, t_end, State::zeros(cfg));
}

/// Window metrics without storing the trace.
Metrics run_metrics(const Config& cfg, Method method, const SignalModel& signal, double t_end,
                    double t_min, double t_max, MDefinition def = MDefinition::RMS);

}  // namespace fter
