#include "fter/simulation.hpp"

#include <cmath>

namespace fter {

long step_count(double t_end, double tau) {
    if (!(t_end >= 0)) throw ContractError("t_end must be >= 0");
    if (!(tau > 0)) throw ContractError("tau must be positive");
    return static_cast<long>(std::floor(t_end / tau + 1e-9));
}

void simulate(const Config& cfg, Method method, const SignalModel& signal, double t_end,
              const State& s0, const StepObserver& observer) {
    cfg.validate();
    if (!s0.matches(cfg)) throw ContractError("initial state dimensions do not match the configuration");
    const long steps = step_count(t_end, cfg.tau);

    Stepper stepper(cfg, method);
    Sampler sampler(signal, cfg.tau);
    Eigen::VectorXd x = s0.stacked();
    double xi = s0.xi;

    for (long k = 0; k <= steps; ++k) {
        const StepInput in = sampler.sample(k);
        observer(in, x, xi);
        if (k == steps) break;
        try {
            stepper.advance(x, xi, in.g);
        } catch (const NumericalError& err) {
            throw NumericalError(std::string(to_string(method)) + ": " + err.what() + " at step " +
                                     std::to_string(k),
                                 k);
        }
    }
}

ErrorTrace run(const Config& cfg, Method method, const SignalModel& signal, double t_end,
               const State& s0) {
    const long steps = step_count(t_end, cfg.tau);
    const auto rows = static_cast<Eigen::Index>(steps + 1);
    const int nz = cfg.n + 1;

    ErrorTrace trace;
    trace.tau = cfg.tau;
    trace.method = std::string(to_string(method));
    trace.t.reserve(static_cast<std::size_t>(rows));
    trace.g.reserve(static_cast<std::size_t>(rows));
    trace.xi.reserve(static_cast<std::size_t>(rows));
    trace.z.resize(rows, nz);
    trace.sigma.resize(rows, nz);

    simulate(cfg, method, signal, t_end, s0, [&](const StepInput& in, const Eigen::VectorXd& x, double xi) {
        const auto k = static_cast<Eigen::Index>(in.k);
        trace.t.push_back(in.t);
        trace.g.push_back(in.g);
        trace.xi.push_back(xi);
        trace.z.row(k) = x.tail(nz).transpose();
        trace.sigma.row(k) = (x.tail(nz) - true_state(signal, cfg.n, in.t)).transpose();
    });
    return trace;
}

Metrics run_metrics(const Config& cfg, Method method, const SignalModel& signal, double t_end,
                    double t_min, double t_max, MDefinition def) {
    const int nz = cfg.n + 1;
    MetricsAccumulator acc(cfg.n, t_min, t_max);
    Eigen::VectorXd truth(nz);
    simulate(cfg, method, signal, t_end, State::zeros(cfg),
             [&](const StepInput& in, const Eigen::VectorXd& x, double) {
                 if (!in_window(in.t, t_min, t_max)) return;
                 for (int i = 0; i < nz; ++i) truth[i] = signal.derivative(in.t, i);
                 acc.add(in.t, x.tail(nz) - truth);
             });
    Metrics out = acc.result(def);
    out.method = std::string(to_string(method));
    return out;
}

}  // namespace fter
