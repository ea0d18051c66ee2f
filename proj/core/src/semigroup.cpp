#include "nlmc/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "nlmc/error.hpp"

namespace nlmc {

// ---------------------------------------------------------------------------
// Trajectory / MarginalFlow

Trajectory::Trajectory(std::vector<double> times, std::vector<std::vector<double>> states,
                       std::string generator_id, double max_repair_drift)
    : times_(std::move(times)),
      states_(std::move(states)),
      generator_id_(std::move(generator_id)),
      max_repair_drift_(max_repair_drift) {
    if (times_.empty() || times_.size() != states_.size())
        throw InputError("trajectory needs matching, non-empty times and states");
    if (times_.front() != 0.0) throw InputError("trajectory must start at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw InputError("trajectory times must be strictly increasing");
    for (const auto& s : states_)
        if (s.size() != states_.front().size()) throw InputError("trajectory states differ in dimension");
}

double Trajectory::min_component() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : states_) lo = std::min(lo, *std::min_element(s.begin(), s.end()));
    return lo;
}

MarginalFlow::MarginalFlow(std::vector<double> times, std::vector<std::vector<double>> states,
                           std::vector<std::vector<double>> derivatives)
    : times_(std::move(times)), states_(std::move(states)), derivatives_(std::move(derivatives)) {
    if (times_.empty() || states_.size() != times_.size() || derivatives_.size() != times_.size())
        throw InputError("marginal flow needs matching nodes");
}

void MarginalFlow::at(double t, std::vector<double>& out) const {
    const std::size_t s = states_.front().size();
    out.resize(s);
    if (times_.size() == 1 || t <= times_.front()) {
        out = states_.front();
        return;
    }
    if (t >= times_.back()) {
        out = states_.back();
        return;
    }
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    const std::size_t lo = hi - 1;
    const double h = times_[hi] - times_[lo];
    const double u = (t - times_[lo]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    for (std::size_t i = 0; i < s; ++i)
        out[i] = h00 * states_[lo][i] + h10 * h * derivatives_[lo][i] + h01 * states_[hi][i] +
                 h11 * h * derivatives_[hi][i];
}

std::vector<double> MarginalFlow::at(double t) const {
    std::vector<double> out;
    at(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

struct Tableau {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr std::array<std::array<double, 6>, 7> a{{
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    }};
    // fifth-order minus embedded fourth-order weights
    static constexpr std::array<double, 7> e{71.0 / 57600,  0.0,         -71.0 / 16695, 71.0 / 1920,
                                             -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

using StepCallback = std::function<void(double, const Vector&, const Vector&)>;

/// Returns the largest pre-repair simplex violation. `on_sample` fires at
/// each sample time, `on_step` at each accepted step (both include t = 0).
double integrate(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                 const IntegratorControls& controls, const StepCallback& on_sample,
                 const StepCallback& on_step) {
    if (m0.size() != spec.dimension()) throw InputError("evolve: m0 has the wrong dimension");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("evolve: horizon must be positive");
    if (!(controls.rtol > 0.0) || !(controls.atol > 0.0))
        throw InputError("evolve: tolerances must be positive");

    const double spacing = controls.sample_every > 0.0 ? controls.sample_every : horizon / 1000.0;
    const auto samples =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / spacing - 1e-9)));
    auto sample_time = [&](std::size_t i) {
        return i >= samples ? horizon : static_cast<double>(i) * spacing;
    };

    const auto n = static_cast<Eigen::Index>(spec.dimension());
    Vector y = Eigen::Map<const Vector>(m0.probs().data(), n);
    auto rhs = [&](const Vector& x) { return spec.drift(std::span<const double>(x.data(), x.size())); };

    Vector f = rhs(y);
    on_sample(0.0, y, f);
    on_step(0.0, y, f);

    std::array<Vector, 7> k;
    Vector stage(n), y5(n), err(n);
    double t = 0.0;
    double h = std::min(spacing, 0.1 / (1.0 + f.cwiseAbs().maxCoeff()));
    double worst_drift = 0.0;
    std::size_t steps = 0;

    for (std::size_t next = 1; next <= samples;) {
        const double target = sample_time(next);
        const bool clipped = h >= target - t;
        const double step = clipped ? target - t : h;

        k[0] = f;
        for (std::size_t s = 1; s < 7; ++s) {
            stage = y;
            for (std::size_t j = 0; j < s; ++j)
                if (Tableau::a[s][j] != 0.0) stage += step * Tableau::a[s][j] * k[j];
            if (s == 6) y5 = stage;
            k[s] = rhs(stage);
        }
        err.setZero();
        for (std::size_t j = 0; j < 7; ++j)
            if (Tableau::e[j] != 0.0) err += step * Tableau::e[j] * k[j];

        double norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double scale =
                controls.atol + controls.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            norm = std::max(norm, std::abs(err[i]) / scale);
        }
        if (!std::isfinite(norm)) throw IntegrationDiverged("evolve: non-finite local error");

        const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
        if (++steps > controls.max_steps) throw IntegrationDiverged("evolve: step limit exceeded");

        if (norm <= 1.0) {
            t = clipped ? target : t + step;
            worst_drift = std::max(worst_drift, simplex_violation(std::span<const double>(y5.data(), y5.size())));
            const Distribution repaired = project_to_simplex(std::span<const double>(y5.data(), y5.size()));
            y = Eigen::Map<const Vector>(repaired.probs().data(), n);
            f = rhs(y);
            on_step(t, y, f);
            if (clipped) {
                on_sample(t, y, f);
                ++next;
                h = std::max(h, step * factor);
            } else {
                h = step * factor;
            }
        } else {
            h = step * factor;
            if (h < 1e-15 * std::max(1.0, t)) throw IntegrationDiverged("evolve: step size underflow");
        }
    }
    return worst_drift;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Trajectory evolve(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                  const IntegratorControls& controls) {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    const double drift = integrate(
        spec, m0, horizon, controls,
        [&](double t, const Vector& y, const Vector&) {
            times.push_back(t);
            states.push_back(to_std(y));
        },
        [](double, const Vector&, const Vector&) {});
    return Trajectory(std::move(times), std::move(states), spec.id(), drift);
}

MarginalFlow evolve_dense(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                          const IntegratorControls& controls) {
    std::vector<double> times;
    std::vector<std::vector<double>> states, derivatives;
    integrate(
        spec, m0, horizon, controls, [](double, const Vector&, const Vector&) {},
        [&](double t, const Vector& y, const Vector& f) {
            times.push_back(t);
            states.push_back(to_std(y));
            derivatives.push_back(to_std(f));
        });
    return MarginalFlow(std::move(times), std::move(states), std::move(derivatives));
}

// ---------------------------------------------------------------------------

AuditReport flow_invariance_audit(const Trajectory& trajectory, const GeneratorSpec& spec) {
    if (trajectory.dimension() != spec.dimension())
        throw InputError("flow_invariance_audit: dimension mismatch");
    AuditReport report;
    report.max_repair_drift = trajectory.max_repair_drift();
    report.min_component = trajectory.min_component();
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const auto& s = trajectory.states()[i];
        ++report.states_checked;
        const double violation = simplex_violation(s);
        report.max_violation = std::max(report.max_violation, violation);
        double sum = 0.0;
        for (double x : s) sum += x;
        if (*std::min_element(s.begin(), s.end()) < -kSimplexTol ||
            std::abs(sum - 1.0) > kRenormalizeTol || !std::isfinite(violation)) {
            report.invalid_states.push_back(i);
            continue;
        }
        const Distribution m(s);
        const Vector drift = spec.drift(m.probs());
        if (!tangent_cone_member(m, std::span<const double>(drift.data(), drift.size())))
            report.tangent_cone_failures.push_back(i);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Jump paths

std::size_t JumpPath::state_at(double t) const {
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    if (it == jump_times.begin()) return initial_state;
    return states_visited[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

double JumpPath::occupation_time(std::size_t state) const {
    double total = 0.0, from = 0.0;
    std::size_t current = initial_state;
    for (std::size_t k = 0; k < jump_times.size(); ++k) {
        if (current == state) total += jump_times[k] - from;
        from = jump_times[k];
        current = states_visited[k];
    }
    if (current == state) total += horizon - from;
    return total;
}

namespace {

/// 53-bit uniforms straight from mt19937_64; std distributions are
/// implementation-defined and would make paths library-dependent.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}
    double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-(*this)()) / rate; }

private:
    std::mt19937_64 engine_;
};

double thinning_bound(const GeneratorSpec& spec) {
    int resolution = 50;
    while (resolution > 1 && SimplexGrid::expected_size(spec.dimension(), resolution) > 200'000)
        resolution /= 2;
    double bound = 0.0;
    for (const auto& m : SimplexGrid(spec.dimension(), resolution))
        bound = std::max(bound, spec.rates(m.probs()).diagonal().cwiseAbs().maxCoeff());
    return 1.1 * bound;
}

}  // namespace

PathSampler::PathSampler(const GeneratorSpec& spec, const Distribution& m0, double horizon,
                         const IntegratorControls& controls)
    : spec_(spec),
      m0_(m0),
      horizon_(horizon),
      flow_(evolve_dense(spec, m0, horizon, controls)),
      bound_(thinning_bound(spec)) {}

JumpPath PathSampler::sample(std::optional<std::size_t> initial_state, std::uint64_t seed) const {
    const std::size_t s = spec_.dimension();
    if (initial_state && *initial_state >= s) throw InputError("sample_path: initial state out of range");

    std::vector<double> m;
    for (double bound = bound_;; bound *= 2.0) {
        Uniform uniform(seed);
        JumpPath path;
        path.horizon = horizon_;
        path.seed = seed;
        if (initial_state) {
            path.initial_state = *initial_state;
        } else {
            const double u = uniform();
            double cumulative = 0.0;
            path.initial_state = s - 1;
            for (std::size_t i = 0; i < s; ++i) {
                cumulative += m0_[i];
                if (u < cumulative) {
                    path.initial_state = i;
                    break;
                }
            }
        }
        if (bound == 0.0) return path;

        std::size_t current = path.initial_state;
        bool exceeded = false;
        for (double t = uniform.exponential(bound); t <= horizon_; t += uniform.exponential(bound)) {
            flow_.at(t, m);
            const Matrix q = spec_.rates(m);
            const auto ci = static_cast<Eigen::Index>(current);
            const double exit = -q(ci, ci);
            if (exit > bound) {
                exceeded = true;
                break;
            }
            const double u = uniform() * bound;
            if (u >= exit) continue;  // rejected candidate
            // reuse u, rescaled into [0, exit), to choose the target state
            double cumulative = 0.0;
            std::size_t target = current;
            for (std::size_t j = 0; j < s; ++j) {
                if (j == current) continue;
                const double rate = std::max(q(ci, static_cast<Eigen::Index>(j)), 0.0);
                cumulative += rate;
                target = rate > 0.0 ? j : target;
                if (u < cumulative) break;
            }
            if (target == current) continue;
            path.jump_times.push_back(t);
            path.states_visited.push_back(target);
            current = target;
        }
        if (!exceeded) return path;
    }
}

JumpPath sample_path(const GeneratorSpec& spec, const Distribution& m0,
                     std::optional<std::size_t> initial_state, double horizon, std::uint64_t seed,
                     const IntegratorControls& controls) {
    return PathSampler(spec, m0, horizon, controls).sample(initial_state, seed);
}

}  // namespace nlmc
