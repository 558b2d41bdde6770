#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "optoweak/config.hpp"
#include "optoweak/csv.hpp"

namespace optoweak {

namespace detail {

inline std::string with_suffix(const std::string& path, const std::string& suffix) {
    const size_t slash = path.find_last_of('/');
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct SelfCheck {
    int failures = 0;

    void report(const std::string& name, bool ok, double value, double bound) {
        if (ok) {
            std::printf("PASS %s (%.3g within %.3g)\n", name.c_str(), value, bound);
        } else {
            std::printf("FAIL %s (%.3g exceeds %.3g)\n", name.c_str(), value, bound);
            ++failures;
        }
    }

    void leq(const std::string& name, double value, double bound) {
        report(name, value <= bound, value, bound);
    }
};

}  // namespace detail

// Built-in operator-algebra and oracle-equivalence checks; PASS/FAIL per line.
inline int run_self_check() {
    detail::SelfCheck sc;

    {
        const Dim dim(16);
        const LinOp c = annihilate(dim), cd = create(dim);
        const LinOp comm = c * cd - cd * c;
        double err = 0.0;
        for (int i = 0; i < dim.d - 1; ++i)
            for (int j = 0; j < dim.d - 1; ++j)
                err = std::max(err, std::abs(comm(i, j) - (i == j ? 1.0 : 0.0)));
        sc.leq("commutator [c,c+] = 1 on interior (d=16)", err, 1e-12);
        sc.leq("create equals adjoint of annihilate", (cd - c.adjoint()).cwiseAbs().maxCoeff(),
               0.0);
    }
    {
        const Dim dim(24);
        const complex alpha(0.2, 0.1);
        const LinOp d1 = displacement(alpha, dim);
        const LinOp c = annihilate(dim);
        const LinOp d2 = expm_oracle(LinOp(alpha * c.adjoint() - std::conj(alpha) * c));
        sc.leq("displacement matches expm oracle (col 0)",
               (d1.col(0) - d2.col(0)).cwiseAbs().maxCoeff(), 1e-12);
        const LinOp prod = d1 * displacement(-alpha, dim);
        const int m = interior_levels(std::abs(alpha), dim);
        sc.leq("D(a) D(-a) = 1 on interior",
               (prod - LinOp::Identity(dim.d, dim.d)).leftCols(m).cwiseAbs().maxCoeff(), 1e-10);
    }
    {
        const Dim dim(40);
        const LinOp s = squeeze(0.4, 0.0, dim);
        sc.leq("squeeze is unitary",
               (s.adjoint() * s - LinOp::Identity(dim.d, dim.d)).cwiseAbs().maxCoeff(), 1e-12);
        Ket vac = Ket::Zero(dim.d);
        vac[0] = 1.0;
        const Ket sq = s * vac;
        const QuadratureMoments m = quadrature_moments(PointerState(sq));
        sc.leq("squeezed x variance = exp(-2r)", std::abs(m.var_x - std::exp(-0.8)), 1e-10);
        sc.leq("squeezed p variance = exp(+2r)", std::abs(m.var_p - std::exp(0.8)), 1e-10);
    }
    for (const auto& [kappa, tau] : {std::pair{0.1, 2.3}, std::pair{0.2, std::numbers::pi}}) {
        const Dim dim(32);
        const CouplingParams p(kappa, true, tau);
        const LinOp analytic = branch_unitary(1, p, dim);
        const LinOp numeric = photon_block(oracle_propagator(p, dim), 1, dim);
        const int m = interior_levels(2.0 * kappa, dim);
        char name[96];
        std::snprintf(name, sizeof name, "branch unitary matches oracle (kappa=%g, tau=%g)",
                      kappa, tau);
        sc.leq(name, interior_spectral_distance(numeric, analytic, m), 1e-8);
    }
    {
        const Dim dim(48);
        const PointerState rho = make_pointer(PointerSpec::thermal(0.4), dim);
        const CouplingParams p(0.12, true, 2.9);
        const PostSelection sel(0.9, 2.5);
        const double p1 = condition(rho, PathState::balanced(), sel, p).probability;
        const double p2 = condition(rho, PathState::balanced(), sel.perp(), p).probability;
        sc.leq("dark + bright probabilities sum to 1", std::abs(p1 + p2 - 1.0), 1e-10);
    }
    {
        const Dim dim(16);
        const std::vector<double> taus = {std::numbers::pi};
        const auto traj =
            unconditioned_trajectory(PointerSpec::ground(), 0.1, true, taus, dim);
        sc.leq("single-photon displacement reaches 4 kappa at tau = pi",
               std::abs(traj[0].second - 0.4) / 0.4, 1e-9);
    }

    return sc.failures == 0 ? 0 : 2;
}

inline int run_command(int argc, const char* const* argv) {
    CLI::App app{"post-selected weak amplification in single-photon optomechanics"};
    app.require_subcommand(1);

    struct CommonOpts {
        std::string config_path;
        std::map<std::string, std::string> kv;
        std::vector<std::pair<std::string, CLI::Option*>> opts;
    };
    static const char* config_keys[] = {"pointer",    "alpha_re",  "alpha_im",     "r",
                                        "phi_sq",     "z",         "weights",      "kappa",
                                        "kerr",       "dim",       "tau_max",      "tau_points",
                                        "theta_points", "phi_points", "output",    "threads"};

    auto add_common = [&](CLI::App* sub, CommonOpts& c) {
        sub->add_option("--config", c.config_path, "flat key = value config file");
        for (const char* key : config_keys) {
            auto* opt = sub->add_option("--" + std::string(key), c.kv[key],
                                        "overrides config key '" + std::string(key) + "'");
            c.opts.emplace_back(key, opt);
        }
    };

    CommonOpts c_traj, c_cond, c_scan, c_kerr, c_limits;
    double cond_theta = std::numbers::pi / 4.0;
    double cond_phi = std::numbers::pi;
    double cond_tau = std::numbers::pi;

    CLI::App* sub_check = app.add_subcommand("check", "run built-in self-tests");
    CLI::App* sub_traj =
        app.add_subcommand("trajectory", "unconditioned mirror displacement vs tau");
    add_common(sub_traj, c_traj);
    CLI::App* sub_cond =
        app.add_subcommand("condition", "one post-selected conditioning result");
    add_common(sub_cond, c_cond);
    sub_cond->add_option("--theta", cond_theta, "post-selection theta, [0, pi/2]");
    sub_cond->add_option("--phi", cond_phi, "post-selection phi, [0, 2 pi)");
    sub_cond->add_option("--tau", cond_tau, "phase time omega_m t");
    CLI::App* sub_scan =
        app.add_subcommand("scan", "maximal conditioned displacement over (tau, theta, phi)");
    add_common(sub_scan, c_scan);
    CLI::App* sub_kerr =
        app.add_subcommand("kerr", "dark-port tau scans with the Kerr phase on and off");
    add_common(sub_kerr, c_kerr);
    CLI::App* sub_limits = app.add_subcommand("limits", "analytic amplification cap");
    add_common(sub_limits, c_limits);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto build_config = [&](const CommonOpts& c) {
        RunConfig cfg;
        if (const char* env = std::getenv("OPTOWEAK_THREADS")) {
            try {
                apply_config_entry(cfg, "threads", env, 0);
            } catch (const ConfigError&) {
                throw ConfigError("OPTOWEAK_THREADS must be a positive integer");
            }
        }
        if (!c.config_path.empty()) parse_config_into(cfg, detail::read_file(c.config_path));
        for (const auto& [key, opt] : c.opts)
            if (opt->count() > 0) apply_config_entry(cfg, key, c.kv.at(key), 0);
        return cfg;
    };

    try {
        if (*sub_check) return run_self_check();

        if (*sub_traj) {
            const RunConfig cfg = build_config(c_traj);
            const Dim dim(cfg.effective_dim());
            const auto taus = cfg.trajectory_taus();
            const auto traj =
                unconditioned_trajectory(cfg.pointer(), cfg.kappa, cfg.kerr, taus, dim);
            write_trajectory_csv(traj, cfg.output);
            double max_abs = 0.0, arg = 0.0;
            for (const auto& [tau, mx] : traj)
                if (std::abs(mx) > max_abs) max_abs = std::abs(mx), arg = tau;
            std::printf("max_abs_mean_x=%s at tau=%s\n", format12(max_abs).c_str(),
                        format12(arg).c_str());
            return 0;
        }

        if (*sub_cond) {
            const RunConfig cfg = build_config(c_cond);
            if (!(cond_theta >= 0.0 && cond_theta <= std::numbers::pi / 2.0))
                throw ConfigError("--theta must lie in [0, pi/2]");
            if (!(cond_phi >= 0.0 && cond_phi < 2.0 * std::numbers::pi))
                throw ConfigError("--phi must lie in [0, 2 pi)");
            if (!(cond_tau >= 0.0 && std::isfinite(cond_tau)))
                throw ConfigError("--tau must be finite and >= 0");
            const Dim dim(cfg.effective_dim());
            const PointerState state = make_pointer(cfg.pointer(), dim);
            const ConditionedResult res =
                condition(state, PathState::balanced(), PostSelection(cond_theta, cond_phi),
                          CouplingParams(cfg.kappa, cfg.kerr, cond_tau));
            const ScanRecord rec{cond_tau,  cond_theta, cond_phi,
                                 res.probability, res.mean_x, res.mean_p,
                                 res.fock_populations[0], res.fock_populations[1]};
            write_csv(std::span(&rec, 1), cfg.output);
            std::printf("probability=%s mean_x=%s mean_p=%s\n", format12(res.probability).c_str(),
                        format12(res.mean_x).c_str(), format12(res.mean_p).c_str());
            for (int n = 0; n < res.fock_populations.size(); ++n)
                std::printf("pop[%d]=%s\n", n, format12(res.fock_populations[n]).c_str());
            return 0;
        }

        if (*sub_scan) {
            const RunConfig cfg = build_config(c_scan);
            const Dim dim(cfg.effective_dim());
            const ScanReport report = amplification_scan(cfg.pointer(), cfg.kappa, cfg.kerr,
                                                         cfg.grid(), dim, cfg.threads);
            write_csv(report.records, cfg.output);
            std::printf("max_abs_x=%s  cap=%s\n", format12(report.max_abs_x).c_str(),
                        format12(report.cap).c_str());
            return 0;
        }

        if (*sub_kerr) {
            const RunConfig cfg = build_config(c_kerr);
            const Dim dim(cfg.effective_dim());
            const auto taus = cfg.trajectory_taus();
            const KerrContrast contrast =
                kerr_contrast(cfg.pointer(), cfg.kappa, taus, dim, cfg.threads);
            write_csv(contrast.with_kerr.records, detail::with_suffix(cfg.output, "_kerr_on"));
            write_csv(contrast.without_kerr.records,
                      detail::with_suffix(cfg.output, "_kerr_off"));
            std::printf("with_kerr max_abs_x=%s  cap=%s\n",
                        format12(contrast.with_kerr.max_abs_x).c_str(),
                        format12(contrast.with_kerr.cap).c_str());
            std::printf("without_kerr max_abs_x=%s  cap=%s\n",
                        format12(contrast.without_kerr.max_abs_x).c_str(),
                        format12(contrast.without_kerr.cap).c_str());
            return 0;
        }

        if (*sub_limits) {
            const RunConfig cfg = build_config(c_limits);
            const PointerSpec spec = cfg.pointer();
            const auto table = limit_table(std::span(&spec, 1));
            write_limits_csv(table, cfg.output);
            std::printf("cap=%s\n", format12(table[0].second).c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}

}  // namespace optoweak
