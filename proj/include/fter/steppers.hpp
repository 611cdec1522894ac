/**
 * @file steppers.hpp
 * @brief One-step maps of the discrete filtering differentiators.
 *
 * All four maps act on the stacked state x = [w; z] and a sample g_k. The
 * measurement always enters through the innovation z_0 - g_k, i.e. with
 * coefficient -g_k on the h (or tau * e_nf) channel.
 *
 *  - FterD:          x' = [C D; 0 Phi_z] x - tau e_nf g + tau u(w_1,k)
 *  - FterE:          x' = [Phi_w G; 0 Phi_z] x - h g + B* u(w_1,k)
 *  - FterExactFull:  x' = Phi x - h g + B* u(w_1,k)
 *  - FterI:          x' = [Phi_w G; 0 Phi_z] x - h g + B* v(w_1,k+1, xi_k+1)
 */
#pragma once

#include "fter/core.hpp"
#include "fter/matrices.hpp"
#include "fter/rootfind.hpp"

#include <array>
#include <cctype>
#include <string>
#include <string_view>

namespace fter {

enum class Method { FterD, FterE, FterExactFull, FterI };

inline constexpr std::array<Method, 4> kAllMethods{Method::FterD, Method::FterE,
                                                   Method::FterExactFull, Method::FterI};

inline std::string_view to_string(Method method) {
    switch (method) {
        case Method::FterD: return "FTER-D";
        case Method::FterE: return "FTER-E";
        case Method::FterExactFull: return "FTER-EXACT-FULL";
        case Method::FterI: return "FTER-I";
    }
    return "?";
}

/// Accepts "FTER-D", "fter_d", "d" and similar spellings.
inline Method parse_method(std::string_view text) {
    std::string key;
    for (char ch : text) {
        if (ch == '-' || ch == '_') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (key.rfind("fter", 0) == 0) key.erase(0, 4);
    if (key == "d") return Method::FterD;
    if (key == "e") return Method::FterE;
    if (key == "i") return Method::FterI;
    if (key == "exactfull" || key == "full" || key == "x") return Method::FterExactFull;
    throw ContractError("unknown method '" + std::string(text) + "'");
}

template <typename Scalar = double>
struct BasicStepInput {
    Scalar g = 0;  // sampled measurement g(t_k)
    long k = 0;
    Scalar t = 0;
};

using StepInput = BasicStepInput<double>;

/**
 * @brief Allocation-free stepping for a fixed (config, tau).
 *
 * Holds the precomputed matrices, the implicit coefficients a_0..a_m and the
 * per-row injection gains. Not thread-safe (owns scratch buffers); use one
 * instance per run.
 */
template <typename Scalar = double>
class BasicStepper {
public:
    using Vector = VectorX<Scalar>;

    BasicStepper(const BasicConfig<Scalar>& cfg, Method method)
        : cfg_(cfg),
          method_(method),
          mats_(BasicStepMatrices<Scalar>::build(cfg)),
          a_(implicit_coefficients(cfg)) {
        init_buffers();
    }

    BasicStepper(const BasicConfig<Scalar>& cfg, Method method, const BasicStepMatrices<Scalar>& mats,
                 const Vector& a)
        : cfg_(cfg), method_(method), mats_(mats), a_(a) {
        if (mats.n != cfg.n || mats.nf != cfg.nf || mats.tau != cfg.tau)
            throw ContractError("step matrices were built for a different configuration");
        if (a.size() != cfg.dim()) throw ContractError("implicit coefficients have the wrong length");
        init_buffers();
    }

    const BasicConfig<Scalar>& config() const { return cfg_; }
    const BasicStepMatrices<Scalar>& matrices() const { return mats_; }
    const Vector& coefficients() const { return a_; }
    Method method() const { return method_; }

    /// Explicit w_1-row propagation of the exact schemes: row 0 of [Phi_w G] x - h_0 g.
    Scalar w1_propagation(const Vector& x, Scalar g) const {
        return mats_.explicit_block.row(0).dot(x) - mats_.h[0] * g;
    }

    /**
     * Advances the stacked state in place. `xi` receives the support variable
     * (implicit scheme) or sign(w_1,k) (explicit schemes). For the implicit
     * scheme `outcome` receives the case analysis when non-null.
     */
    void advance(Vector& x, Scalar& xi, Scalar g, BasicCaseOutcome<Scalar>* outcome = nullptr) {
        const int nf = cfg_.nf;
        const Scalar w1 = x[0];
        switch (method_) {
            case Method::FterD:
                next_.noalias() = mats_.euler_block * x;
                next_[nf - 1] -= cfg_.tau * g;
                fill_injection(w1, sign(w1));
                next_.noalias() += cfg_.tau * inj_;
                xi = sign(w1);
                break;
            case Method::FterE:
                next_.noalias() = mats_.explicit_block * x;
                next_.noalias() -= mats_.h * g;
                fill_injection(w1, sign(w1));
                next_.noalias() += mats_.b_star * inj_;
                xi = sign(w1);
                break;
            case Method::FterExactFull:
                next_.noalias() = mats_.phi_full * x;
                next_.noalias() -= mats_.h * g;
                fill_injection(w1, sign(w1));
                next_.noalias() += mats_.b_star * inj_;
                xi = sign(w1);
                break;
            case Method::FterI: {
                next_.noalias() = mats_.explicit_block * x;
                next_.noalias() -= mats_.h * g;
                const Scalar b = -next_[0];
                const BasicCaseOutcome<Scalar> sol = implicit_solve(a_, b);
                fill_injection(sol.omega_next, sol.xi_next);
                next_.noalias() += mats_.b_star * inj_;
                next_[0] = sol.omega_next;
                xi = sol.xi_next;
                if (outcome) *outcome = sol;
                break;
            }
        }
        if (!next_.allFinite()) throw NumericalError("non-finite state after step");
        x.swap(next_);
    }

    BasicState<Scalar> step(const BasicState<Scalar>& s, const BasicStepInput<Scalar>& in,
                            BasicCaseOutcome<Scalar>* outcome = nullptr) {
        if (!s.matches(cfg_)) throw ContractError("state dimensions do not match the configuration");
        Vector x = s.stacked();
        Scalar xi = s.xi;
        try {
            advance(x, xi, in.g, outcome);
        } catch (const NumericalError& err) {
            throw NumericalError(err.what(), in.k);
        }
        return BasicState<Scalar>::from_stacked(cfg_, x, xi);
    }

private:
    void init_buffers() {
        const int dim = cfg_.dim();
        next_ = Vector::Zero(dim);
        inj_ = Vector::Zero(dim);
        gains_ = Vector(dim);
        exponents_ = Vector(dim);
        for (int i = 0; i < dim; ++i) {
            gains_[i] = detail::psi_gain(i, cfg_);
            exponents_[i] = detail::psi_exponent(i, cfg_);
        }
    }

    // inj_i = gain_i * |omega|^{e_i} * selection; e_m = 0 contributes the selection alone.
    void fill_injection(Scalar omega, Scalar selection) {
        using std::abs;
        using std::pow;
        const Scalar mag = abs(omega);
        const int m = cfg_.m();
        for (int i = 0; i < m; ++i)
            inj_[i] = mag == 0 ? Scalar(0) : gains_[i] * (pow(mag, exponents_[i]) * selection);
        inj_[m] = gains_[m] * selection;
    }

    BasicConfig<Scalar> cfg_;
    Method method_;
    BasicStepMatrices<Scalar> mats_;
    Vector a_;
    Vector next_, inj_, gains_, exponents_;
};

using Stepper = BasicStepper<double>;

template <typename Scalar>
BasicState<Scalar> step_with(Method method, const BasicConfig<Scalar>& cfg,
                             const BasicStepMatrices<Scalar>& mats, const BasicState<Scalar>& s,
                             const BasicStepInput<Scalar>& in) {
    BasicStepper<Scalar> stepper(cfg, method, mats, implicit_coefficients(cfg));
    return stepper.step(s, in);
}

template <typename Scalar>
BasicState<Scalar> fterd_step(const BasicConfig<Scalar>& cfg, const BasicStepMatrices<Scalar>& mats,
                              const BasicState<Scalar>& s, const BasicStepInput<Scalar>& in) {
    return step_with(Method::FterD, cfg, mats, s, in);
}

template <typename Scalar>
BasicState<Scalar> ftere_step(const BasicConfig<Scalar>& cfg, const BasicStepMatrices<Scalar>& mats,
                              const BasicState<Scalar>& s, const BasicStepInput<Scalar>& in) {
    return step_with(Method::FterE, cfg, mats, s, in);
}

template <typename Scalar>
BasicState<Scalar> fter_exact_full_step(const BasicConfig<Scalar>& cfg,
                                        const BasicStepMatrices<Scalar>& mats,
                                        const BasicState<Scalar>& s,
                                        const BasicStepInput<Scalar>& in) {
    return step_with(Method::FterExactFull, cfg, mats, s, in);
}

template <typename Scalar>
BasicState<Scalar> fteri_step(const BasicConfig<Scalar>& cfg, const BasicStepMatrices<Scalar>& mats,
                              const BasicState<Scalar>& s, const BasicStepInput<Scalar>& in,
                              BasicCaseOutcome<Scalar>* outcome = nullptr) {
    BasicStepper<Scalar> stepper(cfg, Method::FterI, mats, implicit_coefficients(cfg));
    return stepper.step(s, in, outcome);
}

}  // namespace fter
