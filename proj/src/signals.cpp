#include "fter/signals.hpp"

#include <cmath>
#include <numbers>

namespace fter {

double BaseSignal::derivative(double t, int order) const {
    if (order < 0) throw ContractError("derivative order must be >= 0");
    double value = 0;
    // d^order/dt^order of sum_p c_p t^p, Horner over the surviving terms
    const int deg = static_cast<int>(poly.size()) - 1;
    for (int p = deg; p >= order; --p) {
        double falling = 1;
        for (int q = 0; q < order; ++q) falling *= static_cast<double>(p - q);
        value = value * t + poly[static_cast<std::size_t>(p)] * falling;
    }
    for (const Sinusoid& s : sines) {
        value += s.amplitude * std::pow(s.frequency, order) *
                 std::sin(s.frequency * t + s.phase + order * std::numbers::pi / 2);
    }
    return value;
}

bool NoiseSpec::has_gaussian() const {
    for (const auto& term : terms)
        if (std::holds_alternative<GaussianNoise>(term)) return true;
    return false;
}

NoiseSpec NoiseSpec::with_seed(std::uint64_t seed) const {
    NoiseSpec out = *this;
    for (auto& term : out.terms)
        if (auto* g = std::get_if<GaussianNoise>(&term)) g->seed = seed;
    return out;
}

SignalModel scenario_signal(int id) {
    SignalModel model;
    // sin(3t) + cos(2t) - sin(t)
    const std::vector<Sinusoid> trig{{1.0, 3.0, 0.0}, {1.0, 2.0, std::numbers::pi / 2}, {-1.0, 1.0, 0.0}};
    switch (id) {
        case 1:
            model.name = "scenario1";
            model.base.poly = {0.0, 0.0, 0.0, 0.0, 1.0};
            model.base.sines = {{1.0, 1.0, 0.0}};
            model.L_true = 25.0;
            break;
        case 2:
            model.name = "scenario2";
            model.base.sines = trig;
            model.noise.terms = {GaussianNoise{0.1, 0}};
            model.L_true = 98.0;
            break;
        case 3:
            model.name = "scenario3";
            model.base.sines = trig;
            model.noise.terms = {CosineNoise{1.0, 10000.0, 0.7791}, GaussianNoise{0.5, 0}};
            model.L_true = 98.0;
            break;
        default:
            throw ContractError("unknown scenario id " + std::to_string(id));
    }
    return model;
}

Eigen::VectorXd true_state(const SignalModel& model, int n, double t) {
    Eigen::VectorXd x(n + 1);
    for (int i = 0; i <= n; ++i) x[i] = model.derivative(t, i);
    return x;
}

Sampler::Sampler(SignalModel model, double tau) : model_(std::move(model)), tau_(tau) {
    if (!(tau > 0)) throw ContractError("sampling period must be positive");
    for (const auto& term : model_.noise.terms) {
        if (const auto* g = std::get_if<GaussianNoise>(&term)) {
            if (!(g->sigma >= 0)) throw ContractError("Gaussian sigma must be >= 0");
            streams_.push_back({g->sigma, g->seed, std::mt19937_64(g->seed),
                                std::normal_distribution<double>(0.0, g->sigma)});
        }
    }
}

void Sampler::reset() {
    for (auto& s : streams_) {
        s.engine.seed(s.seed);
        s.dist.reset();
    }
    next_k_ = 0;
    last_k_ = -1;
    last_draw_ = 0;
}

double Sampler::gaussian_at(long k) {
    if (k < 0) throw ContractError("sample index must be >= 0");
    if (streams_.empty()) return 0;
    if (k == last_k_) return last_draw_;
    if (k < next_k_) reset();
    double total = 0;
    while (next_k_ <= k) {
        total = 0;
        for (auto& s : streams_) total += s.sigma > 0 ? s.dist(s.engine) : 0.0;
        ++next_k_;
    }
    last_k_ = k;
    last_draw_ = total;
    return total;
}

double Sampler::deterministic_noise(double t) const {
    double v = 0;
    for (const auto& term : model_.noise.terms)
        if (const auto* c = std::get_if<CosineNoise>(&term))
            v += c->amplitude * std::cos(c->frequency * t + c->phase);
    return v;
}

StepInput Sampler::sample(long k) {
    if (k < 0) throw ContractError("sample index must be >= 0");
    StepInput in;
    in.k = k;
    in.t = static_cast<double>(k) * tau_;
    in.g = model_.f0(in.t);
    if (!model_.noise.empty()) in.g += deterministic_noise(in.t) + gaussian_at(k);
    return in;
}

}  // namespace fter
