#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "optoweak/dynamics.hpp"
#include "optoweak/pointer.hpp"

namespace optoweak {

// Below this post-selection probability the port is treated as exactly dark.
inline constexpr double p_floor = 1e-16;
inline constexpr double orthogonality_tol = 1e-14;

// Photon path state (amplitude in arm A, amplitude in arm B). The balanced
// state is what the first beam splitter produces.
struct PathState {
    complex c_A;
    complex c_B;

    PathState(complex a, complex b) : c_A(a), c_B(b) {
        if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-12)
            throw std::invalid_argument("PathState must be normalized");
    }

    static PathState balanced() {
        const double s = 1.0 / std::sqrt(2.0);
        return {complex(s, 0.0), complex(s, 0.0)};
    }
};

// Post-selected path state (cos theta, e^{i phi} sin theta). The second beam
// splitter plus detector choice is absorbed here, so an exactly dark port is
// exactly representable.
struct PostSelection {
    double theta;
    double phi;

    PostSelection(double theta_, double phi_) : theta(theta_), phi(phi_) {
        if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0))
            throw std::invalid_argument("theta must lie in [0, pi/2]");
        if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi))
            throw std::invalid_argument("phi must lie in [0, 2 pi)");
    }

    complex amp_A() const { return complex(std::cos(theta), 0.0); }
    complex amp_B() const { return std::sin(theta) * std::exp(complex(0.0, phi)); }

    // Orthogonal to the balanced input: the dark port of the interferometer.
    static PostSelection dark_port() { return {std::numbers::pi / 4.0, std::numbers::pi}; }

    // The complementary port.
    PostSelection perp() const {
        double phi2 = phi + std::numbers::pi;
        if (phi2 >= 2.0 * std::numbers::pi) phi2 -= 2.0 * std::numbers::pi;
        return {std::numbers::pi / 2.0 - theta, phi2};
    }
};

inline complex selection_overlap(const PostSelection& sel, const PathState& input) {
    return std::conj(sel.amp_A()) * input.c_A + std::conj(sel.amp_B()) * input.c_B;
}

// Mirror operator implementing "photon evolved, then detected at sel":
//   M = <sel|A> c_A U_1(tau) + <sel|B> c_B U_0(tau)
// Conditioning is M|psi> for pure pointers and M rho M† for mixed ones.
inline LinOp kraus_operator(const PathState& input, const PostSelection& sel,
                            const CouplingParams& p, Dim dim) {
    const complex a = std::conj(sel.amp_A()) * input.c_A;
    const complex b = std::conj(sel.amp_B()) * input.c_B;
    return a * branch_unitary(1, p, dim) + b * branch_unitary(0, p, dim);
}

struct ConditionedResult {
    double probability;
    PointerState state;  // normalized
    double mean_x;       // zero-point units
    double mean_p;
    Eigen::VectorXd fock_populations;
};

inline ConditionedResult condition(const PointerState& pointer, const PathState& input,
                                   const PostSelection& sel, const CouplingParams& p) {
    const Dim dim(state_dim(pointer));
    const LinOp m = kraus_operator(input, sel, p, dim);

    ConditionedResult out{};
    if (std::holds_alternative<Ket>(pointer)) {
        Ket cond = m * std::get<Ket>(pointer);
        out.probability = cond.squaredNorm();
        if (out.probability < p_floor)
            throw DarkPortVanished("post-selection probability below p_floor");
        cond /= cond.norm();
        out.state = cond;
    } else {
        const DensOp& rho = std::get<DensOp>(pointer);
        DensOp cond = m * rho * m.adjoint();
        out.probability = cond.trace().real();
        if (out.probability < p_floor)
            throw DarkPortVanished("post-selection probability below p_floor");
        cond /= cond.trace().real();
        out.state = DensOp(std::move(cond));
    }
    out.mean_x = expectation(position_quadrature(dim), out.state).real();
    out.mean_p = expectation(momentum_quadrature(dim), out.state).real();
    out.fock_populations = fock_populations(out.state);
    return out;
}

// A_w = <sel| n_A |input> / <sel|input>; the measured observable is the
// photon number in the coupled arm.
inline complex weak_value(const PathState& input, const PostSelection& sel) {
    const complex den = selection_overlap(sel, input);
    if (std::abs(den) < orthogonality_tol)
        throw OrthogonalSelection("weak value undefined at orthogonal post-selection");
    return std::conj(sel.amp_A()) * input.c_A / den;
}

struct FirstOrderPrediction {
    double pred_x;
    double pred_p;
};

// Leading-order conditioned pointer shift. Over one interaction the mirror
// picks up the phase-space displacement u + iv = kappa (1 - e^{-i tau}); for a
// weak value A_w the conditioned means to first order in kappa are
//   <x> = <x>' + 2u Re A_w - 2 Im A_w (v Var_x' - u Cov')
//   <p> = <p>' + 2v Re A_w + 2 Im A_w (u Var_p' - v Cov')
// with all moments taken in the freely rotated initial pointer state. The
// imaginary part couples through the pointer covariance, which is what lets a
// wide pointer amplify beyond the unconditioned shift.
inline FirstOrderPrediction first_order_prediction(complex a_w, const CouplingParams& p,
                                                   const PointerSpec& pointer) {
    const Dim dim(std::max(2, min_pointer_dim(pointer) + 16));
    const PointerState initial = make_pointer(pointer, dim);
    const LinOp rot = free_rotation(p.tau, dim);

    PointerState rotated;
    if (std::holds_alternative<Ket>(initial))
        rotated = Ket(rot * std::get<Ket>(initial));
    else
        rotated = DensOp(rot * std::get<DensOp>(initial) * rot.adjoint());

    const QuadratureMoments m = quadrature_moments(rotated);
    const double u = p.kappa * (1.0 - std::cos(p.tau));
    const double v = p.kappa * std::sin(p.tau);
    const double re = a_w.real(), im = a_w.imag();
    return {
        m.mean_x + 2.0 * u * re - 2.0 * im * (v * m.var_x - u * m.cov_xp),
        m.mean_p + 2.0 * v * re + 2.0 * im * (u * m.var_p - v * m.cov_xp),
    };
}

}  // namespace optoweak
