#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "optoweak/hilbert.hpp"

namespace optoweak {

// Dimensionless coupling parameters: kappa = g/omega_m, tau = omega_m t.
struct CouplingParams {
    double kappa;
    bool kerr_enabled;
    double tau;

    CouplingParams(double kappa_, bool kerr_enabled_, double tau_)
        : kappa(kappa_), kerr_enabled(kerr_enabled_), tau(tau_) {
        if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
        if (!std::isfinite(tau) || tau < 0.0)
            throw std::invalid_argument("tau must be finite and >= 0");
    }
};

// exp(-i tau c†c)
inline LinOp free_rotation(double tau, Dim dim) {
    LinOp r = LinOp::Zero(dim.d, dim.d);
    for (int n = 0; n < dim.d; ++n) r(n, n) = std::exp(complex(0.0, -tau * n));
    return r;
}

// Displacement picked up by the mirror on the n-photon branch.
inline complex branch_displacement(int n_photon, const CouplingParams& p) {
    return double(n_photon) * p.kappa * (1.0 - std::exp(complex(0.0, -p.tau)));
}

// Photon-number-squared phase, second order in kappa. Zero with Kerr disabled.
inline double kerr_phase(int n_photon, const CouplingParams& p) {
    if (!p.kerr_enabled) return 0.0;
    return double(n_photon * n_photon) * p.kappa * p.kappa * (p.tau - std::sin(p.tau));
}

// Mirror evolution conditional on photon number n in the coupled cavity:
//   U_n(tau) = exp(i n^2 k^2 (tau - sin tau)) D(n k (1 - e^{-i tau})) exp(-i tau c†c)
// The common optical phase e^{-i n w0 t} is dropped; both interferometer arms
// carry it identically and it cancels in every post-selected quantity.
inline LinOp branch_unitary(int n_photon, const CouplingParams& p, Dim dim) {
    if (n_photon != 0 && n_photon != 1)
        throw std::invalid_argument("branch_unitary supports photon numbers 0 and 1");
    const LinOp rot = free_rotation(p.tau, dim);
    if (n_photon == 0) return rot;
    const complex scalar = std::exp(complex(0.0, kerr_phase(1, p)));
    return scalar * (displacement(branch_displacement(1, p), dim) * rot);
}

// H / (hbar omega_m) on the (photon-in-arm-A occupation) x (mirror) space,
// photon index major: basis |n_A> x |m> at row n_A*d + m.
//   H~ = I (x) c†c - kappa n_A (x) (c + c†)
// The omega_0 term is a global phase between the arms and is dropped.
inline LinOp full_hamiltonian(const CouplingParams& p, Dim dim) {
    const int d = dim.d;
    LinOp h = LinOp::Zero(2 * d, 2 * d);
    const LinOp num = number_op(dim);
    const LinOp x = position_quadrature(dim);
    h.topLeftCorner(d, d) = num;
    h.bottomRightCorner(d, d) = num - p.kappa * x;
    return h;
}

// exp(-i H~ tau) by eigendecomposition of the Hermitian H~; exact to rounding
// at any tau, no step-size tuning.
inline LinOp oracle_propagator(const CouplingParams& p, Dim dim) {
    return expm_oracle(LinOp(complex(0.0, -p.tau) * full_hamiltonian(p, dim)));
}

// Evolve a normalized joint state on the 2 (x) d space.
inline Ket oracle_evolve(const CouplingParams& p, const Ket& joint, Dim dim) {
    if (joint.size() != 2 * dim.d)
        throw DimensionMismatch("oracle_evolve: joint state must have 2*d amplitudes");
    Ket out = oracle_propagator(p, dim) * joint;
    if (std::abs(out.norm() - joint.norm()) > 1e-10)
        throw ConvergenceError("oracle_evolve failed to preserve the norm");
    const int d = dim.d;
    const int guard = (d + 9) / 10;
    double tail = 0.0;
    for (int n = d - guard; n < d; ++n) tail += std::norm(out[n]) + std::norm(out[d + n]);
    if (tail > tail_tol)
        throw TruncationError("oracle_evolve: evolved tail mass " + std::to_string(tail) +
                              " exceeds tail_tol");
    return out;
}

// Mirror-space block of a joint operator for a given photon occupation.
inline LinOp photon_block(const LinOp& joint_op, int n_photon, Dim dim) {
    const int d = dim.d;
    return joint_op.block(n_photon * d, n_photon * d, d, d);
}

// Number of low Fock levels whose images under a displacement of magnitude
// beta_abs stay clear of the truncation boundary: the amplitude leaked k
// levels up from the top kept column is of order (beta sqrt(d))^k / k!.
inline int interior_levels(double beta_abs, Dim dim) {
    const int d = dim.d;
    const double grow = beta_abs * std::sqrt(double(d));
    double term = 1.0;
    int k = 0;
    while (term > 1e-12 && k < d - 1) {
        ++k;
        term *= grow / double(k);
    }
    return std::max(1, d - k);
}

// Spectral norm of (A - e^{i gamma} B) restricted to the first `cols` basis
// columns, with gamma aligning the (0,0) elements.
inline double interior_spectral_distance(const LinOp& a, const LinOp& b, int cols) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("interior_spectral_distance: shape mismatch");
    complex phase(1.0, 0.0);
    if (std::abs(a(0, 0)) > 0 && std::abs(b(0, 0)) > 0)
        phase = std::exp(complex(0.0, std::arg(a(0, 0) * std::conj(b(0, 0)))));
    const LinOp diff = (a - phase * b).leftCols(cols);
    Eigen::JacobiSVD<LinOp> svd(diff);
    return svd.singularValues()[0];
}

}  // namespace optoweak
