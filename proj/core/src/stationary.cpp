#include "nlmc/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "nlmc/error.hpp"
#include "nlmc/semigroup.hpp"
#include "parallel.hpp"

namespace nlmc {

namespace {

std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector as_vector(const Distribution& m) {
    return Eigen::Map<const Vector>(m.probs().data(), static_cast<Eigen::Index>(m.size()));
}

/// Newton on the first S-1 drift components in the chart m = (y, 1 - sum y).
/// Steps are truncated to stay inside the simplex.
std::optional<Vector> newton_chart(const GeneratorSpec& spec, Vector m,
                                   const StationaryControls& controls) {
    const Eigen::Index s = m.size();
    if (s == 1) return m;
    const Eigen::Index r = s - 1;

    Vector g = spec.drift(view(m));
    double norm = sup_norm(g);
    Matrix jacobian(r, r);
    Vector direction(s), plus(s), minus(s), candidate(s);

    for (std::size_t it = 0; it < controls.max_newton_iterations && norm > 1e-15; ++it) {
        const double h = controls.fd_step * (1.0 + m.cwiseAbs().maxCoeff());
        for (Eigen::Index b = 0; b < r; ++b) {
            direction.setZero();
            direction[b] = 1.0;
            direction[s - 1] = -1.0;
            plus = m + h * direction;
            minus = m - h * direction;
            jacobian.col(b) = (spec.drift(view(plus)) - spec.drift(view(minus))).head(r) / (2.0 * h);
        }
        Eigen::FullPivLU<Matrix> lu(jacobian);
        if (!lu.isInvertible()) break;
        const Vector delta = lu.solve(-g.head(r));
        if (!delta.allFinite()) break;
        direction.head(r) = delta;
        direction[s - 1] = -delta.sum();

        double limit = 1.0;
        for (Eigen::Index i = 0; i < s; ++i)
            if (direction[i] < 0.0) limit = std::min(limit, std::max(m[i], 0.0) / -direction[i]);

        bool accepted = false;
        for (double lambda = limit; lambda > 1e-10; lambda *= 0.5) {
            candidate = (m + lambda * direction).cwiseMax(0.0);
            candidate /= candidate.sum();
            const Vector gc = spec.drift(view(candidate));
            const double nc = sup_norm(gc);
            if (nc < norm * (1.0 - 1e-4 * lambda)) {
                m = candidate;
                g = gc;
                norm = nc;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (norm <= controls.residual_tol) return m;
    return std::nullopt;
}

/// Damped iteration m <- (1 - a) m + a x(m); requires irreducibility along
/// the way. Returns the limit when |x(m) - m| reaches the tolerance.
std::optional<Vector> damped_fixed_point(const GeneratorSpec& spec, Vector m,
                                         const StationaryControls& controls) {
    auto frozen = [&](const Vector& p) -> std::optional<Vector> {
        const Matrix q = spec.rates(view(p));
        if (!irreducible(q, controls.rate_floor)) return std::nullopt;
        try {
            return stationary_vector(q, controls.rate_floor);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    };

    auto x = frozen(m);
    if (!x) return std::nullopt;
    double gap = sup_norm(*x - m);
    double alpha = controls.initial_damping;
    for (std::size_t it = 0; it < controls.max_fixed_point_iterations; ++it) {
        if (gap <= controls.fixed_point_tol) return m;
        const Vector candidate = (1.0 - alpha) * m + alpha * *x;
        auto xc = frozen(candidate);
        if (!xc) return std::nullopt;
        const double gc = sup_norm(*xc - candidate);
        if (gc < gap) {
            m = candidate;
            x = std::move(xc);
            gap = gc;
            alpha = std::min(1.0, alpha * 1.5);
        } else {
            alpha *= 0.5;
            if (alpha < 1e-8) return std::nullopt;  // cycling or stalled
        }
    }
    return gap <= controls.fixed_point_tol ? std::optional<Vector>(m) : std::nullopt;
}

struct SeedOutcome {
    std::vector<Vector> candidates;
};

SeedOutcome run_seed(const GeneratorSpec& spec, const Distribution& seed,
                     const StationaryControls& controls) {
    SeedOutcome out;
    const Vector m = as_vector(seed);
    if (auto p = damped_fixed_point(spec, m, controls)) out.candidates.push_back(*p);
    if (auto p = newton_chart(spec, m, controls)) out.candidates.push_back(*p);
    if (out.candidates.empty()) {
        try {
            IntegratorControls ic;
            ic.sample_every = controls.fallback_horizon;
            const auto traj = evolve(spec, seed, controls.fallback_horizon, ic);
            const Vector end = as_vector(traj.final_state());
            if (auto p = newton_chart(spec, end, controls))
                out.candidates.push_back(*p);
            else if (sup_norm(spec.drift(view(end))) <= controls.residual_tol)
                out.candidates.push_back(end);
        } catch (const IntegrationDiverged&) {
        }
    }
    return out;
}

}  // namespace

Vector stationary_vector(const Matrix& q, double rate_floor) {
    if (!irreducible(q, rate_floor)) throw ReducibleGenerator("rate matrix is reducible");
    const Eigen::Index s = q.rows();
    Matrix a(s + 1, s);
    a.topRows(s) = q.transpose();
    a.row(s).setOnes();
    Vector rhs = Vector::Zero(s + 1);
    rhs[s] = 1.0;

    const Eigen::ColPivHouseholderQR<Matrix> qr(a);
    Vector x = qr.solve(rhs);
    x += qr.solve(rhs - a * x);  // one step of iterative refinement

    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    const double res = sup_norm(q.transpose() * x);
    if (!x.allFinite() || res > 1e-12 * scale || std::abs(x.sum() - 1.0) > 1e-12 ||
        x.minCoeff() <= 0.0)
        throw NumericalError("stationary solve failed (residual " + std::to_string(res) + ")");
    return x;
}

Distribution frozen_stationary(const GeneratorSpec& spec, const Distribution& m, double rate_floor) {
    const Vector x = stationary_vector(spec.rates(m.probs()), rate_floor);
    return Distribution(std::vector<double>(x.data(), x.data() + x.size()));
}

double residual(const GeneratorSpec& spec, const Distribution& m) {
    return sup_norm(spec.drift(m.probs()));
}

StationarySet find_invariant(const GeneratorSpec& spec, const SimplexGrid& seeds,
                             const StationaryControls& controls) {
    if (seeds.dimension() != spec.dimension()) throw InputError("find_invariant: seed grid dimension mismatch");
    auto set = find_invariant(spec, seeds.points(), controls);
    set.grid_resolution = seeds.resolution();
    return set;
}

StationarySet find_invariant(const GeneratorSpec& spec, const std::vector<Distribution>& seeds,
                             const StationaryControls& controls) {
    for (const auto& s : seeds)
        if (s.size() != spec.dimension()) throw InputError("find_invariant: seed dimension mismatch");

    std::vector<SeedOutcome> outcomes(seeds.size());
    detail::parallel_for(seeds.size(), [&](std::size_t i) { outcomes[i] = run_seed(spec, seeds[i], controls); });

    StationarySet set;
    set.seed_count = seeds.size();

    struct Cluster {
        Vector representative;
        std::vector<Distribution> seeds;
    };
    std::vector<Cluster> clusters;
    auto join = [&](const Vector& p, const std::vector<Distribution>& origin) {
        for (auto& c : clusters) {
            if (sup_norm(c.representative - p) <= controls.cluster_radius) {
                for (const auto& o : origin)
                    if (std::find(c.seeds.begin(), c.seeds.end(), o) == c.seeds.end()) c.seeds.push_back(o);
                return;
            }
        }
        clusters.push_back({p, origin});
    };

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!outcomes[i].candidates.empty()) ++set.converged_seeds;
        for (const auto& c : outcomes[i].candidates) join(c, {seeds[i]});
    }

    // polish, then merge representatives that polished onto the same point
    auto raw = std::move(clusters);
    clusters.clear();
    for (auto& c : raw) {
        Vector p = newton_chart(spec, c.representative, controls).value_or(c.representative);
        if (sup_norm(spec.drift(view(p))) > controls.residual_tol) continue;
        join(p, c.seeds);
    }

    for (auto& c : clusters) {
        Distribution point(std::vector<double>(c.representative.data(),
                                               c.representative.data() + c.representative.size()));
        StationaryResult r{point, residual(spec, point), std::move(c.seeds),
                           point.min() > kInteriorTol ? Location::interior : Location::boundary};
        if (r.residual <= controls.residual_tol) set.results.push_back(std::move(r));
    }
    std::sort(set.results.begin(), set.results.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.point.probs().begin(), a.point.probs().end(),
                                            b.point.probs().begin(), b.point.probs().end());
    });

    if (set.converged_seeds < set.seed_count)
        set.diagnostics.push_back(std::to_string(set.seed_count - set.converged_seeds) +
                                  " seed(s) did not converge");
    if (set.results.empty())
        set.diagnostics.push_back("no invariant distribution found; search failure, not non-existence");
    return set;
}

}  // namespace nlmc
