#include "nlmc/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace nlmc {

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON numbers are written from the 17-digit decimal so documents are
// reproducible byte for byte.
ordered_json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return ordered_json::parse(format_decimal(x));
}

ordered_json numbers(std::span<const double> xs) {
    auto out = ordered_json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

std::string classification(Location l) { return l == Location::interior ? "interior" : "boundary"; }

}  // namespace

std::string format_decimal(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    out << "t";
    for (std::size_t i = 0; i < trajectory.dimension(); ++i) out << ",m_" << i + 1;
    out << "\n";
    for (std::size_t r = 0; r < trajectory.size(); ++r) {
        out << format_decimal(trajectory.times()[r]);
        for (double x : trajectory.states()[r]) out << "," << format_decimal(x);
        out << "\n";
    }
    return out.str();
}

std::string jump_path_csv(const JumpPath& path) {
    std::ostringstream out;
    out << "t,state\n" << format_decimal(0.0) << "," << path.initial_state + 1 << "\n";
    for (std::size_t k = 0; k < path.jump_times.size(); ++k)
        out << format_decimal(path.jump_times[k]) << "," << path.states_visited[k] + 1 << "\n";
    return out.str();
}

std::string stationary_csv(const StationarySet& set) {
    std::ostringstream out;
    const std::size_t s = set.empty() ? 0 : set.results.front().point.size();
    for (std::size_t i = 0; i < s; ++i) out << "m_" << i + 1 << ",";
    out << "residual,classification\n";
    for (const auto& r : set.results) {
        for (double x : r.point.probs()) out << format_decimal(x) << ",";
        out << format_decimal(r.residual) << "," << classification(r.classification) << "\n";
    }
    return out.str();
}

std::string stationary_json(const StationarySet& set) {
    ordered_json doc;
    doc["seed_count"] = set.seed_count;
    doc["grid_resolution"] = set.grid_resolution;
    doc["converged_seeds"] = set.converged_seeds;
    doc["results"] = ordered_json::array();
    for (const auto& r : set.results) {
        ordered_json item;
        item["point"] = numbers(r.point.probs());
        item["residual"] = number(r.residual);
        item["classification"] = classification(r.classification);
        item["basin_size"] = r.basin_hint.size();
        doc["results"].push_back(std::move(item));
    }
    doc["diagnostics"] = set.diagnostics;
    return doc.dump(2) + "\n";
}

std::string certificate_json(const Certificate& certificate) {
    ordered_json doc;
    doc["claim"] = to_string(certificate.claim);
    doc["verdict"] = to_string(certificate.verdict);
    doc["label"] = certificate.label();
    doc["generator"] = certificate.generator_id;
    doc["grid_resolution"] = certificate.grid_resolution;
    ordered_json tolerances = ordered_json::object();
    for (const auto& [k, v] : certificate.tolerances) tolerances[k] = number(v);
    doc["tolerances"] = std::move(tolerances);
    ordered_json evidence = ordered_json::object();
    for (const auto& [k, v] : certificate.evidence) evidence[k] = number(v);
    doc["evidence"] = std::move(evidence);
    doc["stationary_point"] =
        certificate.stationary_point ? numbers(*certificate.stationary_point) : ordered_json(nullptr);
    doc["witnesses"] = ordered_json::array();
    for (const auto& w : certificate.witnesses) {
        ordered_json item;
        item["kind"] = w.kind;
        item["point"] = numbers(w.point);
        item["value"] = number(w.value);
        doc["witnesses"].push_back(std::move(item));
    }
    doc["notes"] = certificate.notes;
    return doc.dump(2) + "\n";
}

}  // namespace nlmc
