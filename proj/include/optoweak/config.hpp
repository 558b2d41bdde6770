#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "optoweak/analysis.hpp"
#include "optoweak/pointer.hpp"

namespace optoweak {

// One run of the CLI: pointer, coupling, grid shape, output.
struct RunConfig {
    PointerKind pointer_kind = PointerKind::Ground;
    double alpha_re = 0.0;
    double alpha_im = 0.0;
    double r = 0.0;
    double phi_sq = 0.0;
    double z = 0.0;
    std::vector<double> weights;
    double kappa = 0.05;
    bool kerr = true;
    int dim = 0;          // 0: auto-sized from the pointer plus headroom
    double tau_max = 0.0;  // 0: max(4 pi, 3/kappa)
    int tau_points = 600;
    int theta_points = 41;
    int phi_points = 81;
    unsigned long seed = 0;  // reserved; every computation is deterministic
    std::string output = "out.csv";
    int threads = 1;

    bool operator==(const RunConfig&) const = default;

    PointerSpec pointer() const {
        switch (pointer_kind) {
            case PointerKind::Ground: return PointerSpec::ground();
            case PointerKind::Coherent: return PointerSpec::coherent({alpha_re, alpha_im});
            case PointerKind::Squeezed: return PointerSpec::squeezed(r, phi_sq);
            case PointerKind::CoherentSqueezed:
                return PointerSpec::coherent_squeezed({alpha_re, alpha_im}, r, phi_sq);
            case PointerKind::Thermal: return PointerSpec::thermal(z);
            case PointerKind::FockMixture: return PointerSpec::fock_mixture(weights);
        }
        return PointerSpec::ground();
    }

    double effective_tau_max() const {
        if (tau_max > 0.0) return tau_max;
        return kappa > 0.0 ? std::max(4.0 * std::numbers::pi, 3.0 / kappa)
                           : 4.0 * std::numbers::pi;
    }

    ScanGrid grid() const {
        ScanGrid g;
        g.tau_values = linspace(0.0, effective_tau_max(), tau_points);
        g.theta_values =
            linspace(std::numbers::pi / 4.0 - 0.3, std::numbers::pi / 4.0 + 0.3, theta_points);
        g.phi_values = linspace(std::numbers::pi - 0.6, std::numbers::pi + 0.6, phi_points);
        return g;
    }

    std::vector<double> trajectory_taus() const {
        return linspace(0.0, effective_tau_max(), tau_points);
    }

    // Pointer truncation requirement plus displacement headroom; an explicit
    // dim always wins. The dynamic tail check still guards the result.
    int effective_dim() const {
        if (dim > 0) return dim;
        const int headroom = int(std::ceil(10.0 + 20.0 * kappa * kappa));
        return std::max(2, min_pointer_dim(pointer()) + headroom);
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view v, const std::string& key, int line) {
    const std::string tmp(v);
    char* end = nullptr;
    const double x = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty())
        throw ConfigError("value of '" + key + "' is not a number: '" + tmp + "'", line);
    return x;
}

inline long parse_int(std::string_view v, const std::string& key, int line) {
    long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("value of '" + key + "' is not an integer: '" + std::string(v) + "'",
                          line);
    return x;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// Apply one `key = value` pair. `line` is 1-based for file input and 0 for
// command-line overrides.
inline void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value,
                               int line) {
    const std::string k(key);
    if (k == "pointer") {
        if (value == "ground") cfg.pointer_kind = PointerKind::Ground;
        else if (value == "coherent") cfg.pointer_kind = PointerKind::Coherent;
        else if (value == "squeezed") cfg.pointer_kind = PointerKind::Squeezed;
        else if (value == "coherent_squeezed") cfg.pointer_kind = PointerKind::CoherentSqueezed;
        else if (value == "thermal") cfg.pointer_kind = PointerKind::Thermal;
        else if (value == "fock_mixture") cfg.pointer_kind = PointerKind::FockMixture;
        else throw ConfigError("unknown pointer '" + std::string(value) + "'", line);
    } else if (k == "alpha_re") {
        cfg.alpha_re = detail::parse_double(value, k, line);
    } else if (k == "alpha_im") {
        cfg.alpha_im = detail::parse_double(value, k, line);
    } else if (k == "r") {
        cfg.r = detail::parse_double(value, k, line);
        if (cfg.r < 0.0) throw ConfigError("r must be >= 0", line);
    } else if (k == "phi_sq") {
        cfg.phi_sq = detail::parse_double(value, k, line);
    } else if (k == "z") {
        cfg.z = detail::parse_double(value, k, line);
        if (!(cfg.z >= 0.0 && cfg.z < 1.0)) throw ConfigError("z must lie in [0, 1)", line);
    } else if (k == "weights") {
        std::vector<double> w;
        std::string_view rest = value;
        while (!rest.empty()) {
            const size_t comma = rest.find(',');
            const std::string_view item = detail::trim(rest.substr(0, comma));
            w.push_back(detail::parse_double(item, k, line));
            if (w.back() < 0.0) throw ConfigError("weights must be nonnegative", line);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        double sum = 0.0;
        for (double x : w) sum += x;
        if (w.empty() || sum <= 0.0) throw ConfigError("weights must have a positive sum", line);
        for (double& x : w) x /= sum;
        cfg.weights = std::move(w);
    } else if (k == "kappa") {
        cfg.kappa = detail::parse_double(value, k, line);
        if (cfg.kappa < 0.0) throw ConfigError("kappa must be >= 0", line);
    } else if (k == "kerr") {
        if (value == "on" || value == "true" || value == "1") cfg.kerr = true;
        else if (value == "off" || value == "false" || value == "0") cfg.kerr = false;
        else throw ConfigError("kerr must be on/off", line);
    } else if (k == "dim") {
        const long d = detail::parse_int(value, k, line);
        if (d < 2) throw ConfigError("dim must be >= 2", line);
        cfg.dim = int(d);
    } else if (k == "tau_max") {
        cfg.tau_max = detail::parse_double(value, k, line);
        if (!(cfg.tau_max > 0.0)) throw ConfigError("tau_max must be > 0", line);
    } else if (k == "tau_points") {
        const long n = detail::parse_int(value, k, line);
        if (n < 2) throw ConfigError("tau_points must be >= 2", line);
        cfg.tau_points = int(n);
    } else if (k == "theta_points") {
        const long n = detail::parse_int(value, k, line);
        if (n < 1) throw ConfigError("theta_points must be >= 1", line);
        cfg.theta_points = int(n);
    } else if (k == "phi_points") {
        const long n = detail::parse_int(value, k, line);
        if (n < 1) throw ConfigError("phi_points must be >= 1", line);
        cfg.phi_points = int(n);
    } else if (k == "output") {
        if (value.empty()) throw ConfigError("output must not be empty", line);
        cfg.output = std::string(value);
    } else if (k == "threads") {
        const long n = detail::parse_int(value, k, line);
        if (n < 1) throw ConfigError("threads must be >= 1", line);
        cfg.threads = int(n);
    } else {
        throw ConfigError("unknown key '" + k + "'", line);
    }
}

// Flat `key = value` file, one pair per line, `#` starts a comment.
inline void parse_config_into(RunConfig& cfg, std::string_view text) {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected 'key = value'", line_no);
        const std::string_view key = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        apply_config_entry(cfg, key, value, line_no);
    }
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    parse_config_into(cfg, text);
    return cfg;
}

// Full flat dump; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    auto kv = [&out](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    kv("pointer", pointer_name(cfg.pointer_kind));
    kv("alpha_re", detail::format_double(cfg.alpha_re));
    kv("alpha_im", detail::format_double(cfg.alpha_im));
    kv("r", detail::format_double(cfg.r));
    kv("phi_sq", detail::format_double(cfg.phi_sq));
    kv("z", detail::format_double(cfg.z));
    if (!cfg.weights.empty()) {
        std::string w;
        for (size_t i = 0; i < cfg.weights.size(); ++i) {
            if (i) w += ',';
            w += detail::format_double(cfg.weights[i]);
        }
        kv("weights", w);
    }
    kv("kappa", detail::format_double(cfg.kappa));
    kv("kerr", cfg.kerr ? "on" : "off");
    if (cfg.dim > 0) kv("dim", std::to_string(cfg.dim));
    if (cfg.tau_max > 0.0) kv("tau_max", detail::format_double(cfg.tau_max));
    kv("tau_points", std::to_string(cfg.tau_points));
    kv("theta_points", std::to_string(cfg.theta_points));
    kv("phi_points", std::to_string(cfg.phi_points));
    kv("output", cfg.output);
    kv("threads", std::to_string(cfg.threads));
    return out;
}

}  // namespace optoweak
