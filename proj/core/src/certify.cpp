#include "nlmc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlmc/error.hpp"
#include "parallel.hpp"

namespace nlmc {

namespace {

constexpr std::size_t kMaxWitnesses = 8;

void add_witness(Certificate& cert, Witness w) {
    if (cert.witnesses.size() < kMaxWitnesses) cert.witnesses.push_back(std::move(w));
}

}  // namespace

std::string to_string(Claim claim) {
    return claim == Claim::unique_invariant ? "UNIQUE_INVARIANT" : "STRONGLY_ERGODIC";
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::certified: return "CERTIFIED";
        case Verdict::inconclusive: return "INCONCLUSIVE";
        case Verdict::refuted: return "REFUTED";
    }
    return "INCONCLUSIVE";
}

std::string Certificate::label() const {
    if (verdict == Verdict::certified || qualifier.empty()) return to_string(verdict);
    return to_string(verdict) + "-" + qualifier;
}

std::optional<double> Certificate::find_evidence(const std::string& key) const {
    for (const auto& [k, v] : evidence)
        if (k == key) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Uniqueness

Matrix build_M(const GeneratorSpec& spec, const Distribution& m, double h) {
    if (m.size() != spec.dimension()) throw InputError("build_M: dimension mismatch");
    if (!(h > 0.0)) throw InputError("build_M: step must be positive");
    const auto s = static_cast<Eigen::Index>(m.size());
    if (!irreducible(spec.rates(m.probs()))) throw ReducibleGenerator("build_M: Q(m) is reducible");

    const Eigen::Index r = s - 1;
    const Vector base = Eigen::Map<const Vector>(m.probs().data(), s);
    const double step = h * (1.0 + base.cwiseAbs().maxCoeff());

    auto chart_map = [&](const Vector& p) -> Vector {
        try {
            const Vector x = stationary_vector(spec.rates({p.data(), static_cast<std::size_t>(p.size())}));
            return (x - p).head(r);
        } catch (const ReducibleGenerator&) {
            throw CertificateEvaluationError("build_M: perturbed point leaves the irreducible domain");
        } catch (const NumericalError& e) {
            throw CertificateEvaluationError(std::string("build_M: ") + e.what());
        }
    };

    Matrix result(r, r);
    Vector direction(s);
    for (Eigen::Index b = 0; b < r; ++b) {
        direction.setZero();
        direction[b] = 1.0;
        direction[s - 1] = -1.0;
        result.col(b) = (chart_map(base + step * direction) - chart_map(base - step * direction)) / (2.0 * step);
    }
    return result;
}

Certificate certify_unique(const GeneratorSpec& spec, const SimplexGrid& grid, double h) {
    if (grid.dimension() != spec.dimension()) throw InputError("certify_unique: grid dimension mismatch");

    Certificate cert;
    cert.claim = Claim::unique_invariant;
    cert.generator_id = spec.id();
    cert.grid_resolution = grid.resolution();
    cert.tolerances = {{"fd_step", h}, {"rate_floor", kDefaultRateFloor}, {"tol_det", kDetTol}};
    cert.notes.push_back("grid-certified: hypotheses checked on the simplex grid only");

    const std::size_t s = spec.dimension();
    const double expected_sign = (s - 1) % 2 == 0 ? 1.0 : -1.0;

    if (s == 1) {
        cert.verdict = Verdict::certified;
        cert.evidence = {{"points", 1.0}};
        cert.notes.push_back("single-state chain: the point mass is the only distribution");
        return cert;
    }

    struct PointResult {
        bool irreducible = true;
        bool evaluated = false;
        double det = 0.0;
        std::string error;
    };
    std::vector<PointResult> results(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        auto& r = results[i];
        r.irreducible = irreducible_at(spec, grid[i]);
        if (!r.irreducible) return;
        try {
            r.det = build_M(spec, grid[i], h).determinant();
            r.evaluated = std::isfinite(r.det);
            if (!r.evaluated) r.error = "non-finite determinant";
        } catch (const Error& e) {
            r.error = e.what();
        }
    });

    std::size_t reducible = 0, failed = 0, positive = 0, negative = 0, small = 0;
    double min_abs = std::numeric_limits<double>::infinity(), max_abs = 0.0;
    std::optional<std::size_t> first_positive, first_negative;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!r.irreducible) {
            ++reducible;
            add_witness(cert, {"reducible", grid[i].vector(), 0.0});
            continue;
        }
        if (!r.evaluated) {
            ++failed;
            continue;
        }
        const double a = std::abs(r.det);
        if (a < min_abs) min_abs = a;
        max_abs = std::max(max_abs, a);
        if (a < kDetTol) ++small;
        if (r.det > 0) {
            ++positive;
            if (!first_positive) first_positive = i;
        } else if (r.det < 0) {
            ++negative;
            if (!first_negative) first_negative = i;
        }
    }

    cert.evidence = {{"points", static_cast<double>(grid.size())},
                     {"reducible_points", static_cast<double>(reducible)},
                     {"failed_points", static_cast<double>(failed)},
                     {"positive_det_points", static_cast<double>(positive)},
                     {"negative_det_points", static_cast<double>(negative)},
                     {"min_abs_det", std::isfinite(min_abs) ? min_abs : 0.0},
                     {"max_abs_det", max_abs},
                     {"expected_det_sign", expected_sign}};

    if (reducible > 0) {
        cert.verdict = Verdict::refuted;
        cert.qualifier = "precondition";
        return cert;
    }
    if (failed > 0) {
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "evaluation";
        for (std::size_t i = 0; i < results.size(); ++i)
            if (!results[i].evaluated) add_witness(cert, {"evaluation-failure", grid[i].vector(), 0.0});
        return cert;
    }
    if (small > 0) {
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "near-singular";
        for (std::size_t i = 0; i < results.size(); ++i)
            if (std::abs(results[i].det) < kDetTol)
                add_witness(cert, {"small-det", grid[i].vector(), results[i].det});
        return cert;
    }
    if (positive > 0 && negative > 0) {
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "determinant-sign";
        add_witness(cert, {"positive-det", grid[*first_positive].vector(), results[*first_positive].det});
        add_witness(cert, {"negative-det", grid[*first_negative].vector(), results[*first_negative].det});
        return cert;
    }
    const double sign = positive > 0 ? 1.0 : -1.0;
    cert.evidence.emplace_back("det_sign", sign);
    cert.evidence.emplace_back("margin", min_abs - kDetTol);
    if (sign != expected_sign) {
        // the degree equals (-1)^(S-1); a uniform opposite sign means the
        // numerics cannot be trusted
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "degree-sign";
        return cert;
    }
    cert.verdict = Verdict::certified;
    return cert;
}

// ---------------------------------------------------------------------------
// S = 2

std::function<double(double)> scalar_drift(const GeneratorSpec& spec) {
    if (spec.dimension() != 2) throw InputError("scalar_drift requires S = 2");
    return [spec](double m1) {
        const std::array<double, 2> m{m1, 1.0 - m1};
        const Matrix q = spec.rates(m);
        return m1 * q(0, 0) + (1.0 - m1) * q(1, 0);
    };
}

Certificate certify_ergodic_2(const GeneratorSpec& spec, int root_grid) {
    const auto f = scalar_drift(spec);
    if (root_grid < 2) throw InputError("certify_ergodic_2: root grid must be at least 2");

    Certificate cert;
    cert.claim = Claim::strongly_ergodic;
    cert.generator_id = spec.id();
    cert.grid_resolution = root_grid;
    cert.tolerances = {{"root_tol", kRootTol}, {"scan_margin", kScanMargin}};
    cert.notes.push_back("uniqueness of the stationary point is checked by a sign scan of the scalar drift");

    const auto n = static_cast<std::size_t>(root_grid);
    std::vector<double> t(n + 1), v(n + 1);
    std::vector<int> sign(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        t[i] = static_cast<double>(i) / static_cast<double>(n);
        v[i] = f(t[i]);
        sign[i] = v[i] > kScanMargin ? 1 : (v[i] < -kScanMargin ? -1 : 0);
    }

    auto bisect = [&](double lo, double hi) {
        double flo = f(lo);
        while (hi - lo > kRootTol) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (fm == 0.0) return mid;
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    struct RootRegion {
        std::size_t first, last;  // grid span (run of near-zero values, or a bracket)
        int left, right;          // sign of nearest decided neighbour; 0 = none
        double root;
    };
    std::vector<RootRegion> regions;
    for (std::size_t i = 0; i <= n;) {
        if (sign[i] == 0) {
            std::size_t j = i;
            while (j + 1 <= n && sign[j + 1] == 0) ++j;
            const int left = i > 0 ? sign[i - 1] : 0;
            const int right = j < n ? sign[j + 1] : 0;
            double root;
            if (left != 0 && right != 0 && left != right) {
                root = bisect(t[i - 1], t[j + 1]);
            } else {
                std::size_t best = i;
                for (std::size_t k = i; k <= j; ++k)
                    if (std::abs(v[k]) < std::abs(v[best])) best = k;
                root = t[best];
            }
            regions.push_back({i, j, left, right, root});
            i = j + 1;
        } else {
            if (i < n && sign[i + 1] != 0 && sign[i + 1] != sign[i])
                regions.push_back({i, i + 1, sign[i], sign[i + 1], bisect(t[i], t[i + 1])});
            ++i;
        }
    }

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i)
        if (sign[i] != 0) margin = std::min(margin, std::abs(v[i]));

    std::size_t crossings = 0;
    for (const auto& r : regions) {
        const bool crossing = r.left != 0 && r.right != 0 && r.left != r.right;
        crossings += crossing ? 1 : 0;
        add_witness(cert, {crossing ? "root" : "near-root", {r.root, 1.0 - r.root}, f(r.root)});
    }
    cert.evidence = {{"f_at_0", v.front()},
                     {"f_at_1", v.back()},
                     {"root_regions", static_cast<double>(regions.size())},
                     {"sign_changes", static_cast<double>(crossings)},
                     {"min_abs_drift_off_root", std::isfinite(margin) ? margin : 0.0}};

    if (crossings >= 2) {
        cert.verdict = Verdict::refuted;
        cert.qualifier = "uniqueness";
        return cert;
    }
    if (regions.size() != 1) {
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = regions.empty() ? "no-root" : "scan-margin";
        return cert;
    }
    const auto& r = regions.front();
    const bool single_point = r.last - r.first <= 1;
    const bool oriented = (r.left == 0 || r.left == 1) && (r.right == 0 || r.right == -1) &&
                          (r.left != 0 || r.right != 0);
    if (!single_point || !oriented) {
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "scan-margin";
        return cert;
    }
    cert.verdict = Verdict::certified;
    cert.stationary_point = std::vector<double>{r.root, 1.0 - r.root};
    cert.evidence.emplace_back("m_bar", r.root);
    return cert;
}

// ---------------------------------------------------------------------------
// S = 3

ReducedSystem::ReducedSystem(GeneratorSpec spec) : spec_(std::move(spec)) {
    if (spec_.dimension() != 3) throw InputError("reduced system requires S = 3");
}

std::array<double, 2> ReducedSystem::operator()(double m1, double m2) const {
    const std::array<double, 3> m{m1, m2, 1.0 - m1 - m2};
    const Matrix q = spec_.rates(m);
    return {q(2, 0) + (q(0, 0) - q(2, 0)) * m1 + (q(1, 0) - q(2, 0)) * m2,
            q(2, 1) + (q(0, 1) - q(2, 1)) * m1 + (q(1, 1) - q(2, 1)) * m2};
}

Eigen::Matrix2d ReducedSystem::jacobian(double m1, double m2, double h) const {
    const double step = h * (1.0 + std::max(std::abs(m1), std::abs(m2)));
    const auto p1 = (*this)(m1 + step, m2), n1 = (*this)(m1 - step, m2);
    const auto p2 = (*this)(m1, m2 + step), n2 = (*this)(m1, m2 - step);
    Eigen::Matrix2d j;
    j << (p1[0] - n1[0]) / (2 * step), (p2[0] - n2[0]) / (2 * step),
         (p1[1] - n1[1]) / (2 * step), (p2[1] - n2[1]) / (2 * step);
    return j;
}

double ReducedSystem::divergence(double m1, double m2, double h) const {
    return jacobian(m1, m2, h).trace();
}

ReducedSystem reduced_system(const GeneratorSpec& spec) { return ReducedSystem(spec); }

Certificate certify_ergodic_3(const GeneratorSpec& spec, const SimplexGrid& grid, double h,
                              const StationaryControls& search) {
    const ReducedSystem system(spec);
    if (grid.dimension() != 3) throw InputError("certify_ergodic_3: grid dimension mismatch");

    Certificate cert;
    cert.claim = Claim::strongly_ergodic;
    cert.generator_id = spec.id();
    cert.grid_resolution = grid.resolution();
    cert.tolerances = {{"chart_margin", kChartMargin},
                       {"fd_step", h},
                       {"invariant_residual", search.residual_tol},
                       {"tol_divergence", kDivergenceTol},
                       {"tol_saddle", kSaddleTol}};
    cert.notes.push_back("grid-certified: divergence checked on the margin-extended chart grid only");
    if (spec.clamped_extension())
        cert.notes.push_back(
            "clamped built-in extension intersects the margin region; f need not be C1 there");

    // (1) unique invariant distribution
    const StationarySet set = find_invariant(spec, grid, search);
    cert.evidence.emplace_back("invariant_distributions", static_cast<double>(set.size()));
    cert.evidence.emplace_back("search_seeds", static_cast<double>(set.seed_count));
    if (set.size() != 1) {
        for (const auto& r : set.results) add_witness(cert, {"invariant", r.point.vector(), r.residual});
        cert.verdict = set.empty() ? Verdict::inconclusive : Verdict::refuted;
        cert.qualifier = set.empty() ? "search" : "uniqueness";
        return cert;
    }
    const Distribution m_bar = set.results.front().point;
    cert.stationary_point = m_bar.vector();

    // (2) Bendixson: divergence of uniform sign on the widened chart triangle
    const int k = grid.resolution();
    const double width = 1.0 + 3.0 * kChartMargin;
    std::vector<std::array<double, 2>> points;
    for (int c1 = 0; c1 <= k; ++c1)
        for (int c2 = 0; c1 + c2 <= k; ++c2)
            points.push_back({-kChartMargin + width * c1 / k, -kChartMargin + width * c2 / k});
    std::vector<double> div(points.size());
    detail::parallel_for(points.size(), [&](std::size_t i) {
        div[i] = system.divergence(points[i][0], points[i][1], h);
    });

    double min_abs = std::numeric_limits<double>::infinity(), lo = div.front(), hi = div.front();
    std::size_t small = 0;
    for (std::size_t i = 0; i < div.size(); ++i) {
        min_abs = std::min(min_abs, std::abs(div[i]));
        lo = std::min(lo, div[i]);
        hi = std::max(hi, div[i]);
        if (!(std::abs(div[i]) >= kDivergenceTol)) ++small;
    }
    cert.evidence.emplace_back("divergence_points", static_cast<double>(points.size()));
    cert.evidence.emplace_back("divergence_min", lo);
    cert.evidence.emplace_back("divergence_max", hi);
    cert.evidence.emplace_back("divergence_min_abs", min_abs);

    const bool divergence_ok = small == 0 && (hi < 0.0 || lo > 0.0);
    if (divergence_ok) cert.evidence.emplace_back("divergence_sign", hi < 0.0 ? -1.0 : 1.0);

    // (3) non-saddle at the invariant point
    const Eigen::Matrix2d jac = system.jacobian(m_bar[0], m_bar[1], h);
    const double det = jac.determinant(), trace = jac.trace();
    const double discriminant = trace * trace - 4.0 * det;
    cert.evidence.emplace_back("jacobian_det", det);
    cert.evidence.emplace_back("jacobian_trace", trace);
    cert.evidence.emplace_back("jacobian_discriminant", discriminant);
    cert.evidence.emplace_back("jacobian_11", jac(0, 0));
    cert.evidence.emplace_back("jacobian_12", jac(0, 1));
    cert.evidence.emplace_back("jacobian_21", jac(1, 0));
    cert.evidence.emplace_back("jacobian_22", jac(1, 1));
    const bool non_saddle = det > kSaddleTol || discriminant < -kSaddleTol;

    if (!divergence_ok) {
        for (std::size_t i = 0; i < div.size(); ++i)
            if (!(std::abs(div[i]) >= kDivergenceTol))
                add_witness(cert, {"small-divergence", {points[i][0], points[i][1]}, div[i]});
        if (small == 0) {
            const auto neg = std::min_element(div.begin(), div.end()) - div.begin();
            const auto pos = std::max_element(div.begin(), div.end()) - div.begin();
            add_witness(cert, {"negative-divergence", {points[neg][0], points[neg][1]}, div[neg]});
            add_witness(cert, {"positive-divergence", {points[pos][0], points[pos][1]}, div[pos]});
        }
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "divergence";
        return cert;
    }
    if (!non_saddle) {
        add_witness(cert, {"saddle", m_bar.vector(), det});
        cert.verdict = Verdict::inconclusive;
        cert.qualifier = "saddle";
        return cert;
    }
    cert.verdict = Verdict::certified;
    return cert;
}

}  // namespace nlmc
