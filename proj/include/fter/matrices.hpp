/**
 * @file matrices.hpp
 * @brief Structured transition and input matrices of the discrete schemes.
 *
 * Every matrix is a closed-form function of (n, nf, tau). Entries are
 * tau^p / p! with factorials taken as exact integers.
 */
#pragma once

#include "fter/core.hpp"

#include <array>
#include <cstdint>

namespace fter {

/// Largest supported m + 1, bounded by exact 64-bit factorials.
inline constexpr int kMaxDimension = 20;

inline std::uint64_t factorial(int k) {
    if (k < 0 || k > kMaxDimension) throw std::out_of_range("factorial: argument outside 0..20");
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

/// c[p] = tau^p / p! for p = 0..count-1.
template <typename Scalar>
VectorX<Scalar> taylor_coefficients(Scalar tau, int count) {
    VectorX<Scalar> c(count);
    Scalar power = 1;
    for (int p = 0; p < count; ++p) {
        c[p] = power / static_cast<Scalar>(factorial(p));
        power *= tau;
    }
    return c;
}

/// Upper-triangular Taylor transition matrix of a chain of `dim` integrators.
template <typename Scalar>
MatrixX<Scalar> taylor_matrix(int dim, Scalar tau) {
    const VectorX<Scalar> c = taylor_coefficients(tau, dim);
    MatrixX<Scalar> phi = MatrixX<Scalar>::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) phi(i, j) = c[j - i];
    return phi;
}

/// Input map of the exact discretization: (B*)_{ij} = tau^{j-i+1}/(j-i+1)!.
template <typename Scalar>
MatrixX<Scalar> input_matrix(int dim, Scalar tau) {
    const VectorX<Scalar> c = taylor_coefficients(tau, dim + 1);
    MatrixX<Scalar> b = MatrixX<Scalar>::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) b(i, j) = c[j - i + 1];
    return b;
}

/**
 * @brief Precomputed matrices for one (config, tau) pair.
 *
 * Rebuild whenever tau changes. `explicit_block` is [phi_w g; 0 phi_z] (used
 * by the exact explicit and implicit schemes); `euler_block` is
 * [c d; 0 phi_z] (used by the reference scheme).
 */
template <typename Scalar = double>
struct BasicStepMatrices {
    int n = 0;
    int nf = 0;
    Scalar tau = 0;

    MatrixX<Scalar> phi_full;  // (m+1)x(m+1)
    MatrixX<Scalar> phi_z;     // (n+1)x(n+1)
    MatrixX<Scalar> phi_w;     // nf x nf
    MatrixX<Scalar> c;         // nf x nf
    MatrixX<Scalar> d;         // nf x (n+1)
    MatrixX<Scalar> g;         // nf x (n+1)
    VectorX<Scalar> h;         // m+1
    MatrixX<Scalar> b_star;    // (m+1)x(m+1)
    MatrixX<Scalar> e;         // nf x (n+1)

    MatrixX<Scalar> explicit_block;
    MatrixX<Scalar> euler_block;

    int dim() const { return n + nf + 1; }

    static BasicStepMatrices build(const BasicConfig<Scalar>& cfg) {
        cfg.validate();
        if (cfg.dim() > kMaxDimension)
            throw ContractError("m + 1 exceeds the supported dimension of 20");

        BasicStepMatrices s;
        s.n = cfg.n;
        s.nf = cfg.nf;
        s.tau = cfg.tau;
        const int nf = cfg.nf;
        const int nz = cfg.n + 1;
        const int dim = cfg.dim();
        const Scalar tau = cfg.tau;

        s.phi_full = taylor_matrix(dim, tau);
        s.phi_z = taylor_matrix(nz, tau);
        s.phi_w = taylor_matrix(nf, tau);
        s.b_star = input_matrix(dim, tau);

        s.c = MatrixX<Scalar>::Identity(nf, nf);
        for (int i = 0; i + 1 < nf; ++i) s.c(i, i + 1) = tau;

        s.d = MatrixX<Scalar>::Zero(nf, nz);
        s.d(nf - 1, 0) = tau;

        // g keeps only the first column of the upper-right block of phi_full;
        // e holds the remainder.
        s.g = MatrixX<Scalar>::Zero(nf, nz);
        s.g.col(0) = s.phi_full.block(0, nf, nf, 1);
        s.e = s.phi_full.block(0, nf, nf, nz);
        s.e.col(0).setZero();

        s.h = VectorX<Scalar>::Zero(dim);
        s.h.head(nf) = s.g.col(0);

        s.explicit_block = MatrixX<Scalar>::Zero(dim, dim);
        s.explicit_block.topLeftCorner(nf, nf) = s.phi_w;
        s.explicit_block.topRightCorner(nf, nz) = s.g;
        s.explicit_block.bottomRightCorner(nz, nz) = s.phi_z;

        s.euler_block = MatrixX<Scalar>::Zero(dim, dim);
        s.euler_block.topLeftCorner(nf, nf) = s.c;
        s.euler_block.topRightCorner(nf, nz) = s.d;
        s.euler_block.bottomRightCorner(nz, nz) = s.phi_z;
        return s;
    }
};

using StepMatrices = BasicStepMatrices<double>;

/// max |Phi(tau1) Phi(tau2) - Phi(tau1 + tau2)| over entries, for dimension m + 1.
template <typename Scalar>
Scalar semigroup_check(const BasicConfig<Scalar>& cfg, Scalar tau1, Scalar tau2) {
    if (tau1 < 0 || tau2 < 0) throw ContractError("semigroup_check: periods must be >= 0");
    const int dim = cfg.dim();
    const MatrixX<Scalar> lhs = taylor_matrix(dim, tau1) * taylor_matrix(dim, tau2);
    const MatrixX<Scalar> rhs = taylor_matrix(dim, tau1 + tau2);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace fter
