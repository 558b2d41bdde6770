#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "optoweak/protocol.hpp"

namespace optoweak {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 1) {
        v.push_back(lo);
        return v;
    }
    v.reserve(n);
    const double step = (hi - lo) / double(n - 1);
    for (int i = 0; i < n; ++i) v.push_back(lo + step * i);
    return v;
}

struct ScanGrid {
    std::vector<double> tau_values;
    std::vector<double> theta_values;
    std::vector<double> phi_values;

    void validate() const {
        auto check = [](const std::vector<double>& v, const char* name, double lo, double hi) {
            if (v.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
            for (size_t i = 0; i < v.size(); ++i) {
                if (!std::isfinite(v[i]) || v[i] < lo || v[i] > hi)
                    throw std::invalid_argument(std::string(name) + " grid leaves its range");
                if (i > 0 && v[i] <= v[i - 1])
                    throw std::invalid_argument(std::string(name) + " grid is not ascending");
            }
        };
        check(tau_values, "tau", 0.0, std::numeric_limits<double>::max());
        check(theta_values, "theta", 0.0, std::numbers::pi / 2.0);
        check(phi_values, "phi", 0.0, std::nextafter(2.0 * std::numbers::pi, 0.0));
    }

    // Dense grid centered on the dark port, where amplification lives.
    static ScanGrid default_grid(double kappa) {
        const double tau_max = kappa > 0.0 ? std::max(4.0 * std::numbers::pi, 3.0 / kappa)
                                           : 4.0 * std::numbers::pi;
        ScanGrid g;
        g.tau_values = linspace(0.0, tau_max, 600);
        g.theta_values = linspace(std::numbers::pi / 4.0 - 0.3, std::numbers::pi / 4.0 + 0.3, 41);
        g.phi_values = linspace(std::numbers::pi - 0.6, std::numbers::pi + 0.6, 81);
        return g;
    }
};

struct ScanRecord {
    double tau, theta, phi;
    double probability;
    double mean_x, mean_p;
    double pop0, pop1;
};

struct ScanReport {
    double max_abs_x = 0.0;
    double argmax_tau = 0.0, argmax_theta = 0.0, argmax_phi = 0.0;
    double probability_at_max = 0.0;
    double cap = 0.0;
    std::vector<ScanRecord> records;
};

namespace detail {

template <typename F>
void parallel_for(int n, int threads, F&& body) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Per-tau reductions of Tr[O U_i rho U_j†] for O in {1, x, p, |0><0|, |1><1|}.
// Every (theta, phi) grid point then costs O(1).
struct TauScalars {
    double kerr = 0.0;
    double g11 = 0.0, g00 = 0.0;
    double x11 = 0.0, x00 = 0.0;
    double p11 = 0.0, p00 = 0.0;
    double q0_11 = 0.0, q0_00 = 0.0;
    double q1_11 = 0.0, q1_00 = 0.0;
    complex g10, x10, p10, q0_10, q1_10;
};

inline complex braket_x(const Ket& u, const Ket& v, const std::vector<double>& sq) {
    complex acc(0.0, 0.0);
    for (int n = 0; n + 1 < u.size(); ++n)
        acc += sq[n] * (std::conj(u[n]) * v[n + 1] + std::conj(u[n + 1]) * v[n]);
    return acc;
}

inline complex braket_p(const Ket& u, const Ket& v, const std::vector<double>& sq) {
    complex acc(0.0, 0.0);
    for (int n = 0; n + 1 < u.size(); ++n)
        acc += sq[n] * (std::conj(u[n + 1]) * v[n] - std::conj(u[n]) * v[n + 1]);
    return complex(0.0, 1.0) * acc;
}

inline complex trace_x(const LinOp& a, const std::vector<double>& sq) {
    complex acc(0.0, 0.0);
    for (int n = 0; n + 1 < a.rows(); ++n) acc += sq[n] * (a(n + 1, n) + a(n, n + 1));
    return acc;
}

inline complex trace_p(const LinOp& a, const std::vector<double>& sq) {
    complex acc(0.0, 0.0);
    for (int n = 0; n + 1 < a.rows(); ++n) acc += sq[n] * (a(n, n + 1) - a(n + 1, n));
    return complex(0.0, 1.0) * acc;
}

inline TauScalars tau_scalars(const PointerState& pointer, double kappa, bool kerr, double tau,
                              Dim dim) {
    const CouplingParams p(kappa, kerr, tau);
    TauScalars s;
    s.kerr = kerr_phase(1, p);

    std::vector<double> sq(dim.d);
    for (int n = 0; n < dim.d; ++n) sq[n] = std::sqrt(double(n + 1));

    Eigen::VectorXcd rot(dim.d);
    for (int n = 0; n < dim.d; ++n) rot[n] = std::exp(complex(0.0, -tau * n));
    const LinOp disp = displacement(branch_displacement(1, p), dim);

    if (std::holds_alternative<Ket>(pointer)) {
        const Ket v0 = rot.cwiseProduct(std::get<Ket>(pointer));
        const Ket v1 = disp * v0;
        s.g11 = v1.squaredNorm();
        s.g00 = v0.squaredNorm();
        s.g10 = v0.dot(v1);
        s.x11 = braket_x(v1, v1, sq).real();
        s.x00 = braket_x(v0, v0, sq).real();
        s.x10 = braket_x(v0, v1, sq);
        s.p11 = braket_p(v1, v1, sq).real();
        s.p00 = braket_p(v0, v0, sq).real();
        s.p10 = braket_p(v0, v1, sq);
        s.q0_11 = std::norm(v1[0]);
        s.q0_00 = std::norm(v0[0]);
        s.q0_10 = std::conj(v0[0]) * v1[0];
        s.q1_11 = std::norm(v1[1]);
        s.q1_00 = std::norm(v0[1]);
        s.q1_10 = std::conj(v0[1]) * v1[1];
    } else {
        const DensOp& rho = std::get<DensOp>(pointer);
        DensOp rotated = rho;
        for (int i = 0; i < dim.d; ++i)
            for (int j = 0; j < dim.d; ++j) rotated(i, j) *= rot[i] * std::conj(rot[j]);
        const LinOp a10 = disp * rotated;          // U1 rho U0†
        const LinOp a11 = a10 * disp.adjoint();    // U1 rho U1†
        s.g11 = a11.trace().real();
        s.g00 = rotated.trace().real();
        s.g10 = a10.trace();
        s.x11 = trace_x(a11, sq).real();
        s.x00 = trace_x(rotated, sq).real();
        s.x10 = trace_x(a10, sq);
        s.p11 = trace_p(a11, sq).real();
        s.p00 = trace_p(rotated, sq).real();
        s.p10 = trace_p(a10, sq);
        s.q0_11 = a11(0, 0).real();
        s.q0_00 = rotated(0, 0).real();
        s.q0_10 = a10(0, 0);
        s.q1_11 = a11(1, 1).real();
        s.q1_00 = rotated(1, 1).real();
        s.q1_10 = a10(1, 1);
    }
    return s;
}

// M = a U1 + b U0 at one (theta, phi); returns false when the point vanishes.
inline bool evaluate_point(const TauScalars& s, const PathState& input, double tau, double theta,
                           double phi, ScanRecord& rec) {
    const complex a = std::cos(theta) * input.c_A * std::exp(complex(0.0, s.kerr));
    const complex b = std::exp(complex(0.0, -phi)) * std::sin(theta) * input.c_B;
    const complex ab = a * std::conj(b);
    const double wa = std::norm(a), wb = std::norm(b);

    const double prob = wa * s.g11 + 2.0 * (ab * s.g10).real() + wb * s.g00;
    if (!(prob >= p_floor)) return false;
    rec.tau = tau;
    rec.theta = theta;
    rec.phi = phi;
    rec.probability = prob;
    rec.mean_x = (wa * s.x11 + 2.0 * (ab * s.x10).real() + wb * s.x00) / prob;
    rec.mean_p = (wa * s.p11 + 2.0 * (ab * s.p10).real() + wb * s.p00) / prob;
    rec.pop0 = (wa * s.q0_11 + 2.0 * (ab * s.q0_10).real() + wb * s.q0_00) / prob;
    rec.pop1 = (wa * s.q1_11 + 2.0 * (ab * s.q1_10).real() + wb * s.q1_00) / prob;
    return true;
}

inline std::vector<ScanRecord> evaluate_grid(const PointerState& pointer, double kappa, bool kerr,
                                             const std::vector<double>& taus,
                                             const std::vector<double>& thetas,
                                             const std::vector<double>& phis, Dim dim,
                                             int threads) {
    const PathState input = PathState::balanced();
    std::vector<std::vector<ScanRecord>> per_tau(taus.size());
    parallel_for(int(taus.size()), threads, [&](int i) {
        const TauScalars s = tau_scalars(pointer, kappa, kerr, taus[i], dim);
        auto& out = per_tau[i];
        out.reserve(thetas.size() * phis.size());
        ScanRecord rec;
        for (double theta : thetas)
            for (double phi : phis)
                if (evaluate_point(s, input, taus[i], theta, phi, rec)) out.push_back(rec);
    });
    std::vector<ScanRecord> records;
    for (auto& chunk : per_tau)
        records.insert(records.end(), chunk.begin(), chunk.end());
    return records;
}

// First record (in stored order) attaining the maximal |mean_x|.
inline const ScanRecord& incumbent(const std::vector<ScanRecord>& records) {
    const ScanRecord* best = &records.front();
    for (const auto& r : records)
        if (std::abs(r.mean_x) > std::abs(best->mean_x)) best = &r;
    return *best;
}

// Window of 17 points around `center`, clamped to the base range; singleton
// dimensions stay singleton.
inline std::vector<double> refine_axis(const std::vector<double>& base, double center,
                                       double halfwidth) {
    if (base.size() < 2 || halfwidth <= 0.0) return {center};
    const double lo = std::max(base.front(), center - halfwidth);
    const double hi = std::min(base.back(), center + halfwidth);
    if (!(hi > lo)) return {std::clamp(center, base.front(), base.back())};
    return linspace(lo, hi, 17);
}

}  // namespace detail

// Exhaustive grid evaluation of the conditioned mirror displacement, followed
// by local refinement around the incumbent: 3 rounds, each shrinking the
// search window by a factor 4. Records accumulate in deterministic grid
// order, refinement rounds after the base pass.
inline ScanReport amplification_scan(const PointerSpec& pointer, double kappa, bool kerr,
                                     const ScanGrid& grid, Dim dim, int threads = 1,
                                     int refine_rounds = 3) {
    grid.validate();
    const PointerState state = make_pointer(pointer, dim);

    auto spacing = [](const std::vector<double>& v) {
        return v.size() > 1 ? (v.back() - v.front()) / double(v.size() - 1) : 0.0;
    };
    double h_tau = spacing(grid.tau_values);
    double h_theta = spacing(grid.theta_values);
    double h_phi = spacing(grid.phi_values);

    ScanReport report;
    report.cap = pointer_spread(pointer);
    report.records = detail::evaluate_grid(state, kappa, kerr, grid.tau_values, grid.theta_values,
                                           grid.phi_values, dim, threads);

    for (int round = 0; round < refine_rounds && !report.records.empty(); ++round) {
        const ScanRecord best = detail::incumbent(report.records);
        const auto taus = detail::refine_axis(grid.tau_values, best.tau, 2.0 * h_tau);
        const auto thetas = detail::refine_axis(grid.theta_values, best.theta, 2.0 * h_theta);
        const auto phis = detail::refine_axis(grid.phi_values, best.phi, 2.0 * h_phi);
        auto extra = detail::evaluate_grid(state, kappa, kerr, taus, thetas, phis, dim, threads);
        report.records.insert(report.records.end(), extra.begin(), extra.end());
        h_tau /= 4.0;
        h_theta /= 4.0;
        h_phi /= 4.0;
    }

    if (report.records.empty())
        throw EmptyScan("every grid point fell below p_floor");

    const ScanRecord& best = detail::incumbent(report.records);
    report.max_abs_x = std::abs(best.mean_x);
    report.argmax_tau = best.tau;
    report.argmax_theta = best.theta;
    report.argmax_phi = best.phi;
    report.probability_at_max = best.probability;
    return report;
}

// Mean mirror displacement under the one-photon branch, no post-selection.
// For the ground pointer this is 2 kappa (1 - cos tau) exactly.
inline std::vector<std::pair<double, double>> unconditioned_trajectory(
    const PointerSpec& pointer, double kappa, bool kerr, std::span<const double> taus, Dim dim) {
    const PointerState state = make_pointer(pointer, dim);
    std::vector<std::pair<double, double>> out;
    out.reserve(taus.size());
    for (double tau : taus) {
        const detail::TauScalars s = detail::tau_scalars(state, kappa, kerr, tau, dim);
        out.emplace_back(tau, s.x11 / s.g11);
    }
    return out;
}

struct KerrContrast {
    ScanReport with_kerr;
    ScanReport without_kerr;
};

// Two tau-only scans at the exactly dark port, Kerr phase on versus off.
inline KerrContrast kerr_contrast(const PointerSpec& pointer, double kappa,
                                  std::span<const double> taus, Dim dim, int threads = 1) {
    const PostSelection dark = PostSelection::dark_port();
    ScanGrid grid;
    grid.tau_values.assign(taus.begin(), taus.end());
    grid.theta_values = {dark.theta};
    grid.phi_values = {dark.phi};
    KerrContrast out{amplification_scan(pointer, kappa, true, grid, dim, threads),
                     amplification_scan(pointer, kappa, false, grid, dim, threads)};
    return out;
}

// Analytic amplification caps; no dynamics, so z arbitrarily close to 1 is fine.
inline std::vector<std::pair<PointerSpec, double>> limit_table(
    std::span<const PointerSpec> specs) {
    std::vector<std::pair<PointerSpec, double>> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.emplace_back(s, pointer_spread(s));
    return out;
}

}  // namespace optoweak
