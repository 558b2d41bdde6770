#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optoweak/analysis.hpp"

namespace optoweak {

// 12 significant digits; identical inputs serialize byte-identically.
inline std::string format12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

// Write to a sibling temp file, rename into place on success; an error path
// never leaves a partial result at `path`.
inline void write_atomically(const std::string& path, const std::string& body) {
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << body;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        std::filesystem::remove(tmp, ec2);
        throw IoError("cannot move results into '" + path + "': " + ec.message());
    }
}

}  // namespace detail

inline void write_csv(std::span<const ScanRecord> records, const std::string& path) {
    std::string body = "tau,theta,phi,probability,mean_x,mean_p,pop0,pop1\n";
    for (const auto& r : records) {
        body += format12(r.tau);
        body += ',';
        body += format12(r.theta);
        body += ',';
        body += format12(r.phi);
        body += ',';
        body += format12(r.probability);
        body += ',';
        body += format12(r.mean_x);
        body += ',';
        body += format12(r.mean_p);
        body += ',';
        body += format12(r.pop0);
        body += ',';
        body += format12(r.pop1);
        body += '\n';
    }
    detail::write_atomically(path, body);
}

inline void write_trajectory_csv(std::span<const std::pair<double, double>> rows,
                                 const std::string& path) {
    std::string body = "tau,mean_x\n";
    for (const auto& [tau, mean_x] : rows) {
        body += format12(tau);
        body += ',';
        body += format12(mean_x);
        body += '\n';
    }
    detail::write_atomically(path, body);
}

inline void write_limits_csv(std::span<const std::pair<PointerSpec, double>> rows,
                             const std::string& path) {
    std::string body = "pointer,cap\n";
    for (const auto& [spec, cap] : rows) {
        body += pointer_name(spec.kind);
        body += ',';
        body += format12(cap);
        body += '\n';
    }
    detail::write_atomically(path, body);
}

}  // namespace optoweak
