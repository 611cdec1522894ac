/**
 * @file signals.hpp
 * @brief Analytic test signals with exact derivatives, measurement noise, and
 *        sampling of g_k = f0(k tau) + noise_k.
 */
#pragma once

#include "fter/core.hpp"
#include "fter/steppers.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace fter {

/// amplitude * sin(frequency * t + phase)
struct Sinusoid {
    double amplitude = 0;
    double frequency = 0;
    double phase = 0;
};

/**
 * @brief Polynomial plus a sum of sinusoids; derivatives of any order are exact.
 *
 * poly[p] is the coefficient of t^p.
 */
struct BaseSignal {
    std::vector<double> poly;
    std::vector<Sinusoid> sines;

    double derivative(double t, int order) const;
    double operator()(double t) const { return derivative(t, 0); }
};

/// iid N(0, sigma^2) per sample.
struct GaussianNoise {
    double sigma = 0;
    std::uint64_t seed = 0;
};

/// amplitude * cos(frequency * t + phase)
struct CosineNoise {
    double amplitude = 0;
    double frequency = 0;
    double phase = 0;
};

using NoiseTerm = std::variant<GaussianNoise, CosineNoise>;

/// Sum of noise terms; an empty list means noise-free.
struct NoiseSpec {
    std::vector<NoiseTerm> terms;

    bool empty() const { return terms.empty(); }
    bool has_gaussian() const;
    /// Copy with every Gaussian term reseeded to `seed`.
    NoiseSpec with_seed(std::uint64_t seed) const;
};

struct SignalModel {
    std::string name;
    BaseSignal base;
    NoiseSpec noise;
    std::optional<double> L_true;  // known bound on |f0^(n+1)|

    double f0(double t) const { return base(t); }
    double derivative(double t, int order) const { return base.derivative(t, order); }
};

/// Built-in scenarios 1..3.
SignalModel scenario_signal(int id);

/// (f0(t), f0'(t), .., f0^(n)(t)).
Eigen::VectorXd true_state(const SignalModel& model, int n, double t);
inline Eigen::VectorXd true_state(const SignalModel& model, const Config& cfg, double t) {
    return true_state(model, cfg.n, t);
}

/**
 * @brief Produces g_k for a fixed sampling period.
 *
 * Owns one RNG stream per Gaussian term (std::mt19937_64 feeding
 * std::normal_distribution). Draws are consumed in k order; asking for an
 * earlier k restarts the streams, asking for a later k discards the skipped
 * draws, so g_k is a pure function of (model, tau, k).
 */
class Sampler {
public:
    Sampler(SignalModel model, double tau);

    StepInput sample(long k);

    /// Sum of the per-sample Gaussian draws at index k.
    double gaussian_at(long k);

    /// Deterministic (cosine) part of the noise at time t.
    double deterministic_noise(double t) const;

    double tau() const { return tau_; }
    const SignalModel& model() const { return model_; }

private:
    void reset();

    struct Stream {
        double sigma;
        std::uint64_t seed;
        std::mt19937_64 engine;
        std::normal_distribution<double> dist;
    };

    SignalModel model_;
    double tau_;
    std::vector<Stream> streams_;
    long next_k_ = 0;
    double last_draw_ = 0;
    long last_k_ = -1;
};

/// One-shot convenience wrapper around Sampler.
inline StepInput sample(const SignalModel& model, const Config& cfg, long k) {
    Sampler sampler(model, cfg.tau);
    return sampler.sample(k);
}

}  // namespace fter
