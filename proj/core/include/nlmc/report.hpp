#pragma once

#include <string>

#include "nlmc/certify.hpp"
#include "nlmc/semigroup.hpp"
#include "nlmc/stationary.hpp"

namespace nlmc {

/// Decimal with 17 significant digits ("%.17g"); deterministic.
std::string format_decimal(double value);

/// Header `t,m_1,...,m_S`, one row per sample.
std::string trajectory_csv(const Trajectory& trajectory);
/// Header `t,state`; first row is the initial state at t = 0, states 1-based.
std::string jump_path_csv(const JumpPath& path);
/// Header `m_1,...,m_S,residual,classification`.
std::string stationary_csv(const StationarySet& set);

// Structured-text (JSON) documents with a fixed key order.
std::string stationary_json(const StationarySet& set);
std::string certificate_json(const Certificate& certificate);

}  // namespace nlmc
