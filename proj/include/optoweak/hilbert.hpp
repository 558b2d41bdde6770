#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <variant>

#include "optoweak/errors.hpp"

namespace optoweak {

using complex = std::complex<double>;
using LinOp = Eigen::MatrixXcd;   // dense operator on the truncated oscillator space
using Ket = Eigen::VectorXcd;     // pure mirror state
using DensOp = Eigen::MatrixXcd;  // mixed mirror state
using PointerState = std::variant<Ket, DensOp>;

// Population allowed in the top tenth of the basis before a state is rejected.
inline constexpr double tail_tol = 1e-10;

// Number of retained Fock levels |0> .. |d-1>.
struct Dim {
    int d;
    explicit Dim(int levels) : d(levels) {
        if (d < 2)
            throw DimensionMismatch("Dim requires at least 2 Fock levels, got " +
                                    std::to_string(levels));
    }
};

inline LinOp identity_op(Dim dim) { return LinOp::Identity(dim.d, dim.d); }

// c|n> = sqrt(n)|n-1>
inline LinOp annihilate(Dim dim) {
    LinOp c = LinOp::Zero(dim.d, dim.d);
    for (int n = 1; n < dim.d; ++n) c(n - 1, n) = std::sqrt(double(n));
    return c;
}

// c†|n> = sqrt(n+1)|n+1>
inline LinOp create(Dim dim) {
    LinOp cd = LinOp::Zero(dim.d, dim.d);
    for (int n = 1; n < dim.d; ++n) cd(n, n - 1) = std::sqrt(double(n));
    return cd;
}

inline LinOp number_op(Dim dim) {
    LinOp n = LinOp::Zero(dim.d, dim.d);
    for (int k = 0; k < dim.d; ++k) n(k, k) = double(k);
    return n;
}

// x = c + c†. Vacuum variance is 1: positions are in zero-point units.
inline LinOp position_quadrature(Dim dim) {
    LinOp x = LinOp::Zero(dim.d, dim.d);
    for (int n = 1; n < dim.d; ++n) {
        const double s = std::sqrt(double(n));
        x(n - 1, n) = s;
        x(n, n - 1) = s;
    }
    return x;
}

// p = i(c† - c)
inline LinOp momentum_quadrature(Dim dim) {
    LinOp p = LinOp::Zero(dim.d, dim.d);
    for (int n = 1; n < dim.d; ++n) {
        const double s = std::sqrt(double(n));
        p(n - 1, n) = complex(0.0, -s);
        p(n, n - 1) = complex(0.0, s);
    }
    return p;
}

// Mass of the displaced vacuum D(alpha)|0> beyond level d-1 (Poisson tail).
inline double displaced_vacuum_tail(double abs_alpha_sq, int d) {
    double term = std::exp(-abs_alpha_sq);
    double below = term;
    for (int n = 1; n < d; ++n) {
        term *= abs_alpha_sq / double(n);
        below += term;
    }
    return std::max(0.0, 1.0 - below);
}

// D(alpha) = exp(alpha c† - conj(alpha) c), assembled from the closed-form
// Fock matrix elements
//   <n|D|m> = sqrt(m!/n!) alpha^(n-m) e^(-|a|^2/2) L_m^(n-m)(|a|^2),  n >= m,
// one diagonal offset at a time with the three-term Laguerre recurrence.
inline LinOp displacement(complex alpha, Dim dim) {
    const int d = dim.d;
    const double x = std::norm(alpha);
    if (displaced_vacuum_tail(x, d) > tail_tol)
        throw TruncationError("displacement(|alpha|=" + std::to_string(std::abs(alpha)) +
                              ") spills past level " + std::to_string(d - 1) +
                              "; increase dim");

    LinOp D(d, d);
    const double efac = std::exp(-x / 2.0);
    const complex phase_up = (x == 0.0) ? complex(1.0, 0.0) : alpha / std::abs(alpha);
    const complex phase_dn = -std::conj(phase_up);

    for (int k = 0; k < d; ++k) {
        // radial part sqrt(m!/(m+k)!) |alpha|^k, advanced in m below
        double pref = std::exp(0.5 * (-std::lgamma(double(k + 1))) +
                               (k > 0 ? k * std::log(std::abs(alpha) == 0.0 ? 1.0 : std::abs(alpha)) : 0.0));
        if (k > 0 && std::abs(alpha) == 0.0) pref = 0.0;
        const complex up = std::pow(phase_up, k);
        const complex dn = std::pow(phase_dn, k);

        double Lprev = 0.0, L = 1.0;  // L_0^(k)(x)
        for (int m = 0; m + k < d; ++m) {
            if (m > 0) {
                // (m) L_m = (2m-1+k-x) L_{m-1} - (m-1+k) L_{m-2}
                const double Lnext = ((2.0 * m - 1.0 + k - x) * L - (m - 1.0 + k) * Lprev) / double(m);
                Lprev = L;
                L = Lnext;
                pref *= std::sqrt(double(m) / double(m + k));
            }
            const double radial = pref * efac * L;
            D(m + k, m) = radial * up;
            if (k > 0) D(m, m + k) = radial * dn;
        }
    }
    return D;
}

// Mass of the squeezed vacuum S(r)|0> beyond level d-1. Only even levels are
// populated: p_{2m} = (2m)! / (2^m m!)^2 tanh^{2m}(r) / cosh(r).
inline double squeezed_vacuum_tail(double r, int d) {
    const double t2 = std::tanh(std::abs(r)) * std::tanh(std::abs(r));
    double p = 1.0 / std::cosh(std::abs(r));
    double below = (d >= 1) ? p : 0.0;
    for (int m = 1; 2 * m < d; ++m) {
        p *= t2 * (2.0 * m - 1.0) / (2.0 * m);
        below += p;
    }
    return std::max(0.0, 1.0 - below);
}

namespace detail {

// Hermitian / anti-Hermitian deviation scales, relative to the matrix size.
inline double max_abs(const LinOp& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace detail

// Matrix exponential. Hermitian or anti-Hermitian generators go through an
// eigendecomposition of the Hermitian part; anything else falls back to
// scaling-and-squaring. Raises ConvergenceError when the internal accuracy
// estimate exceeds 1e-10.
inline LinOp expm_oracle(const LinOp& op) {
    if (op.rows() != op.cols())
        throw DimensionMismatch("expm_oracle requires a square matrix");
    const int d = int(op.rows());
    const double scale = std::max(1.0, detail::max_abs(op));
    const double sym_tol = 1e-13 * scale;

    auto exp_of_hermitian_phase = [&](const LinOp& herm, bool imaginary_exponent) {
        Eigen::SelfAdjointEigenSolver<LinOp> es(herm);
        if (es.info() != Eigen::Success)
            throw ConvergenceError("eigendecomposition failed in expm_oracle");
        Eigen::VectorXcd ev(d);
        for (int i = 0; i < d; ++i) {
            const double lam = es.eigenvalues()[i];
            ev[i] = imaginary_exponent ? std::exp(complex(0.0, lam)) : complex(std::exp(lam), 0.0);
        }
        LinOp result = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        const double resid =
            detail::max_abs(es.eigenvectors() * es.eigenvalues().cast<complex>().asDiagonal() *
                                es.eigenvectors().adjoint() -
                            herm) /
            scale;
        if (resid > 1e-10)
            throw ConvergenceError("expm_oracle eigendecomposition residual " + std::to_string(resid));
        return result;
    };

    if (detail::max_abs(op - op.adjoint()) < sym_tol)
        return exp_of_hermitian_phase((op + op.adjoint()) / 2.0, false);
    if (detail::max_abs(op + op.adjoint()) < sym_tol) {
        // op = iK with K Hermitian
        const LinOp K = (op - op.adjoint()) / complex(0.0, 2.0);
        return exp_of_hermitian_phase(K, true);
    }

    const LinOp result = op.exp();
    const LinOp inverse = (-op).exp();
    const double est = detail::max_abs(result * inverse - LinOp::Identity(d, d));
    if (est > 1e-10)
        throw ConvergenceError("expm_oracle scaling-and-squaring estimate " + std::to_string(est));
    return result;
}

// S(r, phi) = exp( (conj(xi) c^2 - xi c†^2)/2 ),  xi = r e^{i phi}.
inline LinOp squeeze(double r, double phi, Dim dim) {
    if (squeezed_vacuum_tail(r, dim.d) > tail_tol)
        throw TruncationError("squeeze(r=" + std::to_string(r) + ") spills past level " +
                              std::to_string(dim.d - 1) + "; increase dim");
    const complex xi = r * std::exp(complex(0.0, phi));
    const LinOp c = annihilate(dim);
    const LinOp gen = (std::conj(xi) * (c * c) - xi * (c.adjoint() * c.adjoint())) / 2.0;
    return expm_oracle(gen);
}

inline complex expectation(const LinOp& obs, const Ket& psi) {
    if (obs.rows() != obs.cols() || obs.cols() != psi.size())
        throw DimensionMismatch("expectation: operator is " + std::to_string(obs.rows()) + "x" +
                                std::to_string(obs.cols()) + ", state has " +
                                std::to_string(psi.size()) + " levels");
    return psi.dot(obs * psi);
}

inline complex expectation(const LinOp& obs, const DensOp& rho) {
    if (obs.rows() != obs.cols() || rho.rows() != rho.cols() || obs.cols() != rho.rows())
        throw DimensionMismatch("expectation: operator is " + std::to_string(obs.rows()) + "x" +
                                std::to_string(obs.cols()) + ", state is " +
                                std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()));
    return (obs * rho).trace();
}

inline complex expectation(const LinOp& obs, const PointerState& state) {
    return std::visit([&](const auto& s) { return expectation(obs, s); }, state);
}

inline int state_dim(const PointerState& state) {
    return std::visit([](const auto& s) { return int(s.rows()); }, state);
}

inline Eigen::VectorXd fock_populations(const Ket& psi) { return psi.cwiseAbs2(); }
inline Eigen::VectorXd fock_populations(const DensOp& rho) { return rho.diagonal().real(); }
inline Eigen::VectorXd fock_populations(const PointerState& state) {
    return std::visit([](const auto& s) { return fock_populations(s); }, state);
}

// Population at and above `from_level`.
inline double tail_mass(const PointerState& state, int from_level) {
    const Eigen::VectorXd pops = fock_populations(state);
    double mass = 0.0;
    for (int n = std::max(0, from_level); n < pops.size(); ++n) mass += pops[n];
    return mass;
}

// Every constructed state must keep the top ceil(d/10) levels below tail_tol,
// otherwise unitarity and probability bookkeeping silently degrade.
inline void require_truncation_ok(const PointerState& state, const std::string& what) {
    const int d = state_dim(state);
    const int guard = (d + 9) / 10;
    const double mass = tail_mass(state, d - guard);
    if (mass > tail_tol) {
        char detail[64];
        std::snprintf(detail, sizeof detail, "%.3g", mass);
        throw TruncationError(what + ": population " + detail + " in top " +
                              std::to_string(guard) + " of " + std::to_string(d) +
                              " levels; increase dim");
    }
}

struct QuadratureMoments {
    double mean_x;
    double mean_p;
    double var_x;
    double var_p;
    double cov_xp;  // <{x,p}>/2 - <x><p>
};

inline QuadratureMoments quadrature_moments(const PointerState& state) {
    const Dim dim(state_dim(state));
    const LinOp x = position_quadrature(dim);
    const LinOp p = momentum_quadrature(dim);
    const double mx = expectation(x, state).real();
    const double mp = expectation(p, state).real();
    const double xx = expectation(LinOp(x * x), state).real();
    const double pp = expectation(LinOp(p * p), state).real();
    const double xp = expectation(LinOp((x * p + p * x) / 2.0), state).real();
    return {mx, mp, xx - mx * mx, pp - mp * mp, xp - mx * mp};
}

}  // namespace optoweak
