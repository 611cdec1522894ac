/**
 * @file rootfind.hpp
 * @brief Per-step scalar solve of the implicit scheme.
 *
 * The next value of w_1 solves
 *
 *   w + sum_{l=1}^{m} a_l |w|^{l/(m+1)} sign(w) + b  in  -a_0 * Sign(w)
 *
 * which splits into a dead zone (|b| <= a_0, w = 0) and two mirrored branches
 * where w = -+ r^{m+1} and r is the only positive root of
 * r^{m+1} + a_m r^m + ... + a_1 r + (a_0 - |b|).
 */
#pragma once

#include "fter/core.hpp"
#include "fter/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fter {

enum class ImplicitCase { NegativeRoot, DeadZone, PositiveRoot };

template <typename Scalar = double>
struct BasicCaseOutcome {
    ImplicitCase case_id = ImplicitCase::DeadZone;
    Scalar omega_next = 0;
    Scalar xi_next = 0;
    int iterations = 0;
    Scalar residual = 0;
};

using CaseOutcome = BasicCaseOutcome<double>;

template <typename Scalar = double>
struct HalleyResult {
    Scalar root = 0;
    int iterations = 0;
    Scalar residual = 0;
};

inline constexpr int kHalleyMaxIterations = 200;

/// a_l = tau^{m-l+1}/(m-l+1)! * lambda_l * L^{(m-l+1)/(m+1)} for l = 0..m.
template <typename Scalar>
VectorX<Scalar> implicit_coefficients(const BasicConfig<Scalar>& cfg) {
    using std::pow;
    cfg.validate();
    const int m = cfg.m();
    const VectorX<Scalar> c = taylor_coefficients(cfg.tau, m + 2);
    VectorX<Scalar> a(m + 1);
    for (int l = 0; l <= m; ++l)
        a[l] = c[m - l + 1] * cfg.lambdas[l] * pow(cfg.L, Scalar(m - l + 1) / Scalar(m + 1));
    return a;
}

namespace detail {

// p, p', p'' by Horner; coefficients in ascending order.
template <typename Scalar>
void eval_poly(const VectorX<Scalar>& poly, Scalar r, Scalar& p, Scalar& dp, Scalar& d2p) {
    const Eigen::Index deg = poly.size() - 1;
    p = poly[deg];
    dp = 0;
    d2p = 0;
    for (Eigen::Index i = deg - 1; i >= 0; --i) {
        d2p = d2p * r + 2 * dp;
        dp = dp * r + p;
        p = p * r + poly[i];
    }
}

}  // namespace detail

/**
 * @brief Positive root of a polynomial with one sign change.
 *
 * `poly` holds ascending coefficients with a strictly negative constant term
 * and non-negative higher coefficients (positive leading term). Halley steps
 * are taken inside a maintained bracket [lo, hi] with p(lo) < 0 < p(hi);
 * any step that leaves the bracket or meets a non-positive denominator is
 * replaced by bisection.
 */
template <typename Scalar>
HalleyResult<Scalar> halley_positive_root(const VectorX<Scalar>& poly, Scalar bracket_hi) {
    using std::abs;
    using std::max;
    using std::pow;
    if (poly.size() < 2) throw ContractError("halley_positive_root: degree must be >= 1");
    const Eigen::Index deg = poly.size() - 1;
    if (!(poly[0] < 0)) throw ContractError("halley_positive_root: constant term must be negative");
    if (!(poly[deg] > 0)) throw ContractError("halley_positive_root: leading term must be positive");
    for (Eigen::Index i = 1; i < deg; ++i)
        if (!(poly[i] >= 0))
            throw ContractError("halley_positive_root: coefficient sequence must change sign once");

    const Scalar tol = Scalar(1e-12) * max(Scalar(1), abs(poly[0]));
    const Scalar width_tol = Scalar(1e-15) * bracket_hi;

    Scalar p, dp, d2p;
    detail::eval_poly(poly, bracket_hi, p, dp, d2p);
    if (!(p > 0)) throw ContractError("halley_positive_root: p(bracket_hi) must be positive");

    Scalar lo = 0;
    Scalar hi = bracket_hi;
    Scalar r = std::min(hi, pow(-poly[0] / poly[deg], Scalar(1) / Scalar(deg)));

    HalleyResult<Scalar> out;
    for (int it = 1; it <= kHalleyMaxIterations; ++it) {
        detail::eval_poly(poly, r, p, dp, d2p);
        out.iterations = it;
        if (abs(p) <= tol || p == 0) {
            out.root = r;
            out.residual = abs(p);
            return out;
        }
        if (p < 0)
            lo = r;
        else
            hi = r;
        if (hi - lo <= width_tol) {
            out.root = r;
            out.residual = abs(p);
            return out;
        }

        const Scalar denom = 2 * dp * dp - p * d2p;
        Scalar next = (lo + hi) / 2;
        if (dp > 0 && denom > 0) {
            const Scalar candidate = r - 2 * p * dp / denom;
            if (candidate > lo && candidate < hi) next = candidate;
        }
        r = next;
    }
    throw NumericalError("halley_positive_root: no convergence within iteration cap");
}

/// Case analysis of the implicit inclusion given a_0..a_m and b.
template <typename Scalar>
BasicCaseOutcome<Scalar> implicit_solve(const VectorX<Scalar>& a, Scalar b) {
    using std::abs;
    using std::pow;
    if (a.size() < 2) throw ContractError("implicit_solve: need a_0..a_m with m >= 1");
    for (Eigen::Index l = 0; l < a.size(); ++l)
        if (!(a[l] > 0)) throw ContractError("implicit_solve: coefficients must be positive");
    if (!std::isfinite(static_cast<double>(b))) throw NumericalError("implicit_solve: b is not finite");

    BasicCaseOutcome<Scalar> out;
    const Scalar a0 = a[0];
    if (abs(b) <= a0) {
        out.case_id = ImplicitCase::DeadZone;
        out.omega_next = 0;
        out.xi_next = -b / a0;
        return out;
    }

    const Eigen::Index m = a.size() - 1;
    VectorX<Scalar> poly(m + 2);
    poly[0] = a0 - abs(b);
    poly.segment(1, m) = a.tail(m);
    poly[m + 1] = 1;

    const Scalar bracket_hi = 1 + a.maxCoeff() + abs(poly[0]);
    const HalleyResult<Scalar> root = halley_positive_root(poly, bracket_hi);
    const Scalar magnitude = pow(root.root, Scalar(m + 1));

    out.iterations = root.iterations;
    out.residual = root.residual;
    if (b > 0) {
        out.case_id = ImplicitCase::NegativeRoot;
        out.omega_next = -magnitude;
        out.xi_next = -1;
    } else {
        out.case_id = ImplicitCase::PositiveRoot;
        out.omega_next = magnitude;
        out.xi_next = 1;
    }
    return out;
}

/**
 * Left side of the inclusion evaluated at a selected pair:
 * w + sum_l a_l |w|^{l/(m+1)} sign(w) + a_0 xi + b. Zero at an exact solution.
 */
template <typename Scalar>
Scalar implicit_residual(const VectorX<Scalar>& a, Scalar b, Scalar omega, Scalar xi) {
    using std::abs;
    using std::pow;
    const Eigen::Index m = a.size() - 1;
    Scalar lhs = omega + a[0] * xi + b;
    if (omega != 0) {
        for (Eigen::Index l = 1; l <= m; ++l)
            lhs += a[l] * pow(abs(omega), Scalar(l) / Scalar(m + 1)) * sign(omega);
    }
    return lhs;
}

}  // namespace fter
