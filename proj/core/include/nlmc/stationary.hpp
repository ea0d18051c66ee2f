#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlmc/generator.hpp"
#include "nlmc/simplex.hpp"

namespace nlmc {

/// Accepted invariant distributions satisfy |m^T Q(m)|_inf <= kInvariantTol.
inline constexpr double kInvariantTol = 1e-10;
/// A result is interior when every coordinate exceeds this.
inline constexpr double kInteriorTol = 1e-8;
inline constexpr double kClusterRadius = 1e-6;

enum class Location { interior, boundary };

struct StationaryResult {
    Distribution point;
    double residual = 0.0;
    /// Seeds whose runs converged to this point.
    std::vector<Distribution> basin_hint;
    Location classification = Location::interior;
};

struct StationarySet {
    std::vector<StationaryResult> results;  // ordered lexicographically by point
    std::size_t seed_count = 0;
    int grid_resolution = 0;  // 0 for an explicit seed list
    std::size_t converged_seeds = 0;
    std::vector<std::string> diagnostics;

    std::size_t size() const noexcept { return results.size(); }
    bool empty() const noexcept { return results.empty(); }
};

struct StationaryControls {
    double initial_damping = 0.5;
    std::size_t max_fixed_point_iterations = 2000;
    double fixed_point_tol = 1e-13;
    std::size_t max_newton_iterations = 60;
    /// Base finite-difference step; scaled by (1 + |m|_inf).
    double fd_step = 1e-6;
    /// Long-horizon evolve used when neither iteration converges from a seed.
    double fallback_horizon = 200.0;
    double cluster_radius = kClusterRadius;
    double residual_tol = kInvariantTol;
    double rate_floor = kDefaultRateFloor;
};

/// Stationary distribution of a single irreducible rate matrix, from the
/// augmented (S+1) x S least-squares system [Q^T; 1^T] x = e_{S+1}.
/// Throws ReducibleGenerator or NumericalError.
Vector stationary_vector(const Matrix& q, double rate_floor = kDefaultRateFloor);

/// x(m): stationary distribution of the frozen chain with generator Q(m).
Distribution frozen_stationary(const GeneratorSpec& spec, const Distribution& m,
                               double rate_floor = kDefaultRateFloor);

/// |m^T Q(m)|_inf
double residual(const GeneratorSpec& spec, const Distribution& m);

/// Multi-start search for invariant distributions. From every seed: damped
/// fixed-point iteration on m -> x(m) (when Q is irreducible there) and
/// Newton on m^T Q(m) = 0 in the simplex chart; a long-horizon evolve is the
/// fallback when both fail. Converged points are clustered and polished.
/// Completeness depends on seed coverage.
StationarySet find_invariant(const GeneratorSpec& spec, const SimplexGrid& seeds,
                             const StationaryControls& controls = {});
StationarySet find_invariant(const GeneratorSpec& spec, const std::vector<Distribution>& seeds,
                             const StationaryControls& controls = {});

}  // namespace nlmc
