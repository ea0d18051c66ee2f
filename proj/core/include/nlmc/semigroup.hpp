#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlmc/generator.hpp"
#include "nlmc/simplex.hpp"

namespace nlmc {

struct IntegratorControls {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Spacing of recorded samples; 0 selects horizon / 1000. Every sample
    /// time is hit exactly by an accepted step.
    double sample_every = 0.0;
    std::size_t max_steps = 50'000'000;
};

/// Samples of the marginal flow t -> Phi^t(m0).
///
/// States are stored as raw vectors so that hand-assembled trajectories can
/// be audited; trajectories returned by evolve() hold valid distributions.
class Trajectory {
public:
    Trajectory(std::vector<double> times, std::vector<std::vector<double>> states,
               std::string generator_id, double max_repair_drift = 0.0);

    std::size_t size() const noexcept { return times_.size(); }
    std::size_t dimension() const noexcept { return states_.front().size(); }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<std::vector<double>>& states() const noexcept { return states_; }
    Distribution state(std::size_t i) const { return Distribution(states_.at(i)); }
    Distribution final_state() const { return Distribution(states_.back()); }
    const std::string& generator_id() const noexcept { return generator_id_; }
    /// Largest simplex violation seen before the per-step projection repair.
    double max_repair_drift() const noexcept { return max_repair_drift_; }
    /// Smallest coordinate over all samples.
    double min_component() const;

private:
    std::vector<double> times_;
    std::vector<std::vector<double>> states_;
    std::string generator_id_;
    double max_repair_drift_;
};

/// Dense marginal flow: cubic Hermite interpolation between accepted steps.
class MarginalFlow {
public:
    MarginalFlow(std::vector<double> times, std::vector<std::vector<double>> states,
                 std::vector<std::vector<double>> derivatives);

    double horizon() const noexcept { return times_.back(); }
    std::size_t nodes() const noexcept { return times_.size(); }
    /// Phi^t(m0) for t in [0, horizon]; writes into `out` (resized).
    void at(double t, std::vector<double>& out) const;
    std::vector<double> at(double t) const;

private:
    std::vector<double> times_;
    std::vector<std::vector<double>> states_;
    std::vector<std::vector<double>> derivatives_;
};

/// Integrates d/dt Phi = Phi Q(Phi) with an adaptive Dormand-Prince 5(4)
/// scheme, projecting back onto the simplex after every accepted step.
///
/// Throws IntegrationDiverged when a step drifts more than
/// kProjectionRepairTol off the simplex, GeneratorEvaluationError on a
/// non-finite rate.
Trajectory evolve(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                  const IntegratorControls& controls = {});

/// Same integration, keeping every accepted step for dense evaluation.
MarginalFlow evolve_dense(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                          const IntegratorControls& controls = {});

struct AuditReport {
    std::size_t states_checked = 0;
    double max_violation = 0.0;     // over stored states
    double max_repair_drift = 0.0;  // recorded by the integrator
    double min_component = 0.0;
    std::vector<std::size_t> invalid_states;          // not a distribution
    std::vector<std::size_t> tangent_cone_failures;   // drift leaves the simplex

    bool clean() const noexcept {
        return invalid_states.empty() && tangent_cone_failures.empty() &&
               max_repair_drift <= kProjectionRepairTol;
    }
};

AuditReport flow_invariance_audit(const Trajectory& trajectory, const GeneratorSpec& spec);

/// One realisation of the time-inhomogeneous chain.
struct JumpPath {
    std::size_t initial_state = 0;
    std::vector<double> jump_times;
    /// State entered at the matching jump time.
    std::vector<std::size_t> states_visited;
    double horizon = 0.0;
    std::uint64_t seed = 0;

    std::size_t state_at(double t) const;
    double occupation_time(std::size_t state) const;

    friend bool operator==(const JumpPath&, const JumpPath&) = default;
};

/// Simulates jump paths by thinning against a constant dominating rate.
/// The marginal flow is computed once and shared by every path.
class PathSampler {
public:
    PathSampler(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                const IntegratorControls& controls = {});

    /// `initial_state` empty draws the start from m0. Deterministic in `seed`.
    JumpPath sample(std::optional<std::size_t> initial_state, std::uint64_t seed) const;

    /// Thinning bound: 1.1 * max |Q_ii| over a resolution-50 grid.
    double bound() const noexcept { return bound_; }
    const MarginalFlow& flow() const noexcept { return flow_; }

private:
    GeneratorSpec spec_;
    Distribution m0_;
    double horizon_;
    MarginalFlow flow_;
    double bound_;
};

JumpPath sample_path(const GeneratorSpec& spec, const Distribution& m0,
                     std::optional<std::size_t> initial_state, double horizon, std::uint64_t seed,
                     const IntegratorControls& controls = {});

}  // namespace nlmc
