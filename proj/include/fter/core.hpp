/**
 * @file core.hpp
 * @brief Domain types and the injection gain law shared by every
 *        discrete filtering differentiator.
 *
 * The differentiator state is the stack [w_1 .. w_nf, z_0 .. z_n] of length
 * m + 1 with m = n + nf. The injection law for stacked row i is
 *
 *   psi_i(w1) = -lambda_{m-i} * L^{(i+1)/(m+1)} * |w1|^{(m-i)/(m+1)} * sign(w1)
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fter {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when a configuration or argument violates a documented contract.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a simulation produces non-finite values or a solver fails.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, long step = -1)
        : std::runtime_error(what), step_(step) {}

    /// Step index at which the failure was detected, or -1 when unknown.
    long step() const noexcept { return step_; }

private:
    long step_;
};

/**
 * @brief Orders, bound, gains and sampling period of a filtering differentiator.
 *
 * lambdas[l] holds lambda_l for l = 0..m. lambda_0 multiplies the discontinuous
 * term that drives z_n; lambda_m multiplies the term that drives w_1.
 */
template <typename Scalar = double>
struct BasicConfig {
    int n = 3;         // differentiation order
    int nf = 2;        // filtering order
    Scalar L = 1;      // bound on |f0^(n+1)|
    VectorX<Scalar> lambdas;
    Scalar tau = Scalar(0.1);

    int m() const { return n + nf; }
    int dim() const { return m() + 1; }

    void validate() const {
        if (n < 0) throw ContractError("differentiation order n must be >= 0");
        if (nf < 1) throw ContractError("filtering order nf must be >= 1");
        if (!(L > 0) || !std::isfinite(static_cast<double>(L)))
            throw ContractError("bound L must be positive and finite");
        if (!(tau > 0) || !std::isfinite(static_cast<double>(tau)))
            throw ContractError("sampling period tau must be positive and finite");
        if (lambdas.size() != dim())
            throw ContractError("expected " + std::to_string(dim()) + " gains, got " +
                                std::to_string(lambdas.size()));
        for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
            if (!(lambdas[i] > 0) || !std::isfinite(static_cast<double>(lambdas[i])))
                throw ContractError("gain lambda_" + std::to_string(i) + " must be positive");
        }
    }

    template <typename Other>
    BasicConfig<Other> cast() const {
        BasicConfig<Other> out;
        out.n = n;
        out.nf = nf;
        out.L = static_cast<Other>(L);
        out.lambdas = lambdas.template cast<Other>();
        out.tau = static_cast<Other>(tau);
        return out;
    }
};

using Config = BasicConfig<double>;

/// Gain set lambda_0..lambda_5 for m = 5 (n = 3, nf = 2).
inline VectorX<double> preset_gains_m5() {
    VectorX<double> g(6);
    g << 1.1, 6.75, 20.26, 32.24, 23.72, 7.0;
    return g;
}

/// n = 3, nf = 2 with the m = 5 gain set. L and tau are caller-supplied.
inline Config preset_config(double L, double tau) {
    Config cfg;
    cfg.n = 3;
    cfg.nf = 2;
    cfg.L = L;
    cfg.tau = tau;
    cfg.lambdas = preset_gains_m5();
    return cfg;
}

/// Filter states w, estimates z, and the last support variable xi.
template <typename Scalar = double>
struct BasicState {
    VectorX<Scalar> w;
    VectorX<Scalar> z;
    Scalar xi = 0;

    static BasicState zeros(const BasicConfig<Scalar>& cfg) {
        BasicState s;
        s.w = VectorX<Scalar>::Zero(cfg.nf);
        s.z = VectorX<Scalar>::Zero(cfg.n + 1);
        s.xi = 0;
        return s;
    }

    /// Stacked [w; z].
    VectorX<Scalar> stacked() const {
        VectorX<Scalar> v(w.size() + z.size());
        v << w, z;
        return v;
    }

    static BasicState from_stacked(const BasicConfig<Scalar>& cfg, const VectorX<Scalar>& v,
                                   Scalar xi = 0) {
        BasicState s;
        s.w = v.head(cfg.nf);
        s.z = v.tail(cfg.n + 1);
        s.xi = xi;
        return s;
    }

    bool matches(const BasicConfig<Scalar>& cfg) const {
        return w.size() == cfg.nf && z.size() == cfg.n + 1;
    }

    bool all_finite() const { return w.allFinite() && z.allFinite() && std::isfinite(xi); }
};

using State = BasicState<double>;

/// Single-valued sign with sign(0) = 0.
template <typename Scalar>
Scalar sign(Scalar x) {
    return static_cast<Scalar>((Scalar(0) < x) - (x < Scalar(0)));
}

/// |x|^gamma * sign(x). gamma = 0 yields sign(x) with sign(0) = 0.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar gamma) {
    using std::abs;
    using std::isfinite;
    using std::pow;
    if (!(gamma >= 0)) throw std::domain_error("signed_power: exponent must be >= 0");
    if (!isfinite(x)) throw std::domain_error("signed_power: argument must be finite");
    if (gamma == 0 || x == 0) return sign(x);
    return pow(abs(x), gamma) * sign(x);
}

namespace detail {

// -lambda_{m-i} * L^{(i+1)/(m+1)}
template <typename Scalar>
Scalar psi_gain(int i, const BasicConfig<Scalar>& cfg) {
    using std::pow;
    const int m = cfg.m();
    return -cfg.lambdas[m - i] * pow(cfg.L, Scalar(i + 1) / Scalar(m + 1));
}

template <typename Scalar>
Scalar psi_exponent(int i, const BasicConfig<Scalar>& cfg) {
    const int m = cfg.m();
    return Scalar(m - i) / Scalar(m + 1);
}

}  // namespace detail

/// Injection term for stacked row i evaluated at w1.
template <typename Scalar>
Scalar psi(int i, const BasicConfig<Scalar>& cfg, Scalar omega1) {
    if (i < 0 || i > cfg.m()) throw std::out_of_range("psi: row index outside 0..m");
    return detail::psi_gain(i, cfg) * signed_power(omega1, detail::psi_exponent(i, cfg));
}

/// [psi_0(w1), .., psi_m(w1)] with the sign(0) = 0 selection.
template <typename Scalar>
VectorX<Scalar> injection_vector(const BasicConfig<Scalar>& cfg, Scalar omega1) {
    VectorX<Scalar> u(cfg.dim());
    for (int i = 0; i <= cfg.m(); ++i) u[i] = psi(i, cfg, omega1);
    return u;
}

/**
 * Injection vector of the implicit scheme: the set-valued sign at the next
 * step is replaced by the selected support value xi_next.
 */
template <typename Scalar>
VectorX<Scalar> injection_vector_implicit(const BasicConfig<Scalar>& cfg, Scalar omega1_next,
                                          Scalar xi_next) {
    using std::abs;
    using std::pow;
    if (!(abs(xi_next) <= 1))
        throw ContractError("injection_vector_implicit: |xi| must be <= 1");
    if (omega1_next != 0 && xi_next != sign(omega1_next))
        throw ContractError("injection_vector_implicit: xi must equal sign(omega) off zero");
    VectorX<Scalar> v(cfg.dim());
    const Scalar mag = abs(omega1_next);
    for (int i = 0; i <= cfg.m(); ++i) {
        const Scalar e = detail::psi_exponent(i, cfg);
        const Scalar p = (e == 0) ? Scalar(1) : (mag == 0 ? Scalar(0) : pow(mag, e));
        v[i] = detail::psi_gain(i, cfg) * p * xi_next;
    }
    return v;
}

}  // namespace fter
