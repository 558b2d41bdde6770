#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "optoweak/hilbert.hpp"

namespace optoweak {

enum class PointerKind {
    Ground,
    Coherent,
    Squeezed,
    CoherentSqueezed,
    Thermal,
    FockMixture,
};

// Declarative description of the initial mirror state.
struct PointerSpec {
    PointerKind kind = PointerKind::Ground;
    complex alpha{0.0, 0.0};
    double r = 0.0;
    double phi = 0.0;
    double z = 0.0;
    std::vector<double> weights;

    static PointerSpec ground() { return {}; }

    static PointerSpec coherent(complex alpha) {
        PointerSpec s;
        s.kind = PointerKind::Coherent;
        s.alpha = alpha;
        return s;
    }

    static PointerSpec squeezed(double r, double phi) {
        if (r < 0.0) throw std::invalid_argument("squeezing parameter r must be >= 0");
        PointerSpec s;
        s.kind = PointerKind::Squeezed;
        s.r = r;
        s.phi = phi;
        return s;
    }

    static PointerSpec coherent_squeezed(complex alpha, double r, double phi) {
        PointerSpec s = squeezed(r, phi);
        s.kind = PointerKind::CoherentSqueezed;
        s.alpha = alpha;
        return s;
    }

    static PointerSpec thermal(double z) {
        if (!(z >= 0.0 && z < 1.0))
            throw std::invalid_argument("thermal z must lie in [0, 1), got " + std::to_string(z));
        PointerSpec s;
        s.kind = PointerKind::Thermal;
        s.z = z;
        return s;
    }

    static PointerSpec fock_mixture(std::vector<double> weights) {
        if (weights.empty()) throw std::invalid_argument("fock mixture needs at least one weight");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("fock mixture weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("fock mixture weights must sum to 1 within 1e-12");
        PointerSpec s;
        s.kind = PointerKind::FockMixture;
        s.weights = std::move(weights);
        return s;
    }

    bool mixed() const {
        return kind == PointerKind::Thermal || kind == PointerKind::FockMixture;
    }
};

inline const char* pointer_name(PointerKind kind) {
    switch (kind) {
        case PointerKind::Ground: return "ground";
        case PointerKind::Coherent: return "coherent";
        case PointerKind::Squeezed: return "squeezed";
        case PointerKind::CoherentSqueezed: return "coherent_squeezed";
        case PointerKind::Thermal: return "thermal";
        case PointerKind::FockMixture: return "fock_mixture";
    }
    return "?";
}

// Everything dimensional lives here; the rest of the library works in the
// dimensionless (kappa, z, tau) parameterization.
struct PhysicalParams {
    double omega_m;        // mechanical angular frequency, rad/s
    double mass;           // mirror mass, kg
    double temperature;    // K
    double omega_0;        // cavity angular frequency, rad/s
    double cavity_length;  // m

    PhysicalParams(double omega_m_, double mass_, double temperature_, double omega_0_,
                   double cavity_length_)
        : omega_m(omega_m_), mass(mass_), temperature(temperature_), omega_0(omega_0_),
          cavity_length(cavity_length_) {
        if (!(omega_m > 0 && mass > 0 && temperature > 0 && omega_0 > 0 && cavity_length > 0))
            throw std::invalid_argument("PhysicalParams fields must be strictly positive");
    }
};

struct DimensionlessParams {
    double kappa;
    double z;
};

inline constexpr double hbar_si = 1.054571817e-34;  // J s
inline constexpr double kB_si = 1.380649e-23;       // J/K

// kappa = g / omega_m with g = (omega_0/L) sigma, sigma = sqrt(hbar/2 m omega_m);
// z = exp(-hbar omega_m / kB T).
inline DimensionlessParams dimensionless_from_physical(const PhysicalParams& p) {
    const double sigma = std::sqrt(hbar_si / (2.0 * p.mass * p.omega_m));
    const double g = (p.omega_0 / p.cavity_length) * sigma;
    return {g / p.omega_m, std::exp(-hbar_si * p.omega_m / (kB_si * p.temperature))};
}

inline int min_pointer_dim(const PointerSpec& spec);

inline PointerState make_pointer(const PointerSpec& spec, Dim dim) {
    const int d = dim.d;
    PointerState state;
    switch (spec.kind) {
        case PointerKind::Ground: {
            Ket psi = Ket::Zero(d);
            psi[0] = 1.0;
            state = std::move(psi);
            break;
        }
        case PointerKind::Coherent: {
            state = Ket(displacement(spec.alpha, dim).col(0));
            break;
        }
        case PointerKind::Squeezed: {
            Ket psi = Ket::Zero(d);
            psi[0] = 1.0;
            state = Ket(squeeze(spec.r, spec.phi, dim) * psi);
            break;
        }
        case PointerKind::CoherentSqueezed: {
            Ket psi = Ket::Zero(d);
            psi[0] = 1.0;
            state = Ket(displacement(spec.alpha, dim) * (squeeze(spec.r, spec.phi, dim) * psi));
            break;
        }
        case PointerKind::Thermal: {
            // Geometric diagonal (1-z) z^n, renormalized over the kept levels
            // so downstream probabilities see trace exactly 1.
            DensOp rho = DensOp::Zero(d, d);
            double p = 1.0, sum = 0.0;
            for (int n = 0; n < d; ++n) {
                rho(n, n) = p;
                sum += p;
                p *= spec.z;
            }
            rho /= sum;
            state = std::move(rho);
            break;
        }
        case PointerKind::FockMixture: {
            if (int(spec.weights.size()) > d)
                throw TruncationError("fock mixture occupies level " +
                                      std::to_string(spec.weights.size() - 1) + ", dim is " +
                                      std::to_string(d));
            DensOp rho = DensOp::Zero(d, d);
            for (int n = 0; n < int(spec.weights.size()); ++n) rho(n, n) = spec.weights[n];
            state = std::move(rho);
            break;
        }
    }
    try {
        require_truncation_ok(state, std::string("make_pointer(") + pointer_name(spec.kind) + ")");
    } catch (const TruncationError& e) {
        // name the dimension that would work (skipping the one family whose
        // sizing itself goes through make_pointer)
        if (spec.kind == PointerKind::CoherentSqueezed) throw;
        throw TruncationError(std::string(e.what()) + "; this pointer needs dim >= " +
                              std::to_string(min_pointer_dim(spec)));
    }
    return state;
}

// Amplification cap of the pointer family, in zero-point units: the standard
// deviation of x in the (antisqueezed-aligned) initial state.
inline double pointer_spread(const PointerSpec& spec) {
    switch (spec.kind) {
        case PointerKind::Ground:
        case PointerKind::Coherent:
            return 1.0;
        case PointerKind::Squeezed:
        case PointerKind::CoherentSqueezed:
            return std::exp(spec.r);
        case PointerKind::Thermal:
            return std::sqrt((1.0 + spec.z) / (1.0 - spec.z));
        case PointerKind::FockMixture: {
            double v = 0.0;
            for (int n = 0; n < int(spec.weights.size()); ++n)
                v += spec.weights[n] * (2.0 * n + 1.0);
            return std::sqrt(v);
        }
    }
    return 1.0;
}

namespace detail {

inline bool pointer_tail_ok(const PointerSpec& spec, int d) {
    const int guard = (d + 9) / 10;
    const int from = d - guard;
    const double budget = tail_tol / 4.0;  // margin over the constructed-state check
    switch (spec.kind) {
        case PointerKind::Ground:
            return true;
        case PointerKind::Coherent:
            return displaced_vacuum_tail(std::norm(spec.alpha), from) <= budget;
        case PointerKind::Squeezed:
            return squeezed_vacuum_tail(spec.r, from) <= budget;
        case PointerKind::CoherentSqueezed:
            return false;  // sized constructively below
        case PointerKind::Thermal: {
            if (spec.z == 0.0) return true;
            return std::pow(spec.z, double(from)) / (1.0 - spec.z) <= budget;
        }
        case PointerKind::FockMixture:
            return int(spec.weights.size()) <= from;
    }
    return true;
}

}  // namespace detail

// Smallest dimension at which the bare pointer passes the truncation rule.
// Callers add displacement headroom on top.
inline int min_pointer_dim(const PointerSpec& spec) {
    if (spec.kind == PointerKind::CoherentSqueezed) {
        // no tidy closed form for the populations; size by construction
        for (int d = 2; d < 4096; d = std::max(d + 4, d * 5 / 4)) {
            try {
                make_pointer(spec, Dim(d));
                return d;
            } catch (const TruncationError&) {
            }
        }
    } else {
        for (int d = 2; d < 100000; ++d)
            if (detail::pointer_tail_ok(spec, d)) return d;
    }
    throw TruncationError(std::string("no workable dimension for pointer ") +
                          pointer_name(spec.kind));
}

}  // namespace optoweak
