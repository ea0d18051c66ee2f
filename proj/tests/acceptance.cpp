// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "nlmc/certify.hpp"
#include "nlmc/semigroup.hpp"
#include "nlmc/stationary.hpp"
#include "oracles.hpp"

using namespace nlmc;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what + (ok ? "" : " [x]");
}

Distribution random_point(std::mt19937_64& rng, std::size_t s) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(s);
    double total = 0;
    for (auto& x : v) total += (x = e(rng));
    for (auto& x : v) x /= total;
    return Distribution(v);
}

Outcome oscillator_orbit() {
    Outcome o;
    Distribution m0{0.2, 0.4, 0.4};
    auto traj = evolve(corpus("oscillator"), m0, 2 * std::numbers::pi);
    const double gap = max_abs_diff(traj.final_state().probs(), m0.probs());
    note(o, gap <= 1e-4, fmt("|Phi(2pi) - m0| = %.3g", gap));
    note(o, traj.min_component() >= 0.12, fmt("min component %.6f", traj.min_component()));
    return o;
}

Outcome bistable_set() {
    Outcome o;
    auto set = find_invariant(corpus("bistable"), SimplexGrid(2, 20));
    const double expected[] = {0.25, 0.5, 0.75};
    bool match = set.size() == 3;
    double worst = 0;
    for (std::size_t i = 0; match && i < 3; ++i) {
        worst = std::max(worst, std::abs(set.results[i].point[0] - expected[i]));
        worst = std::max(worst, std::abs(set.results[i].point[1] - (1 - expected[i])));
    }
    note(o, match && worst <= 1e-8, std::to_string(set.size()) + " points, max error " + fmt("%.3g", worst));
    double f_direct = 0, f_lib = 0;
    auto f = scalar_drift(corpus("bistable"));
    for (double x : expected) {
        f_direct = std::max(f_direct, std::abs(oracle::bistable_drift(x)));
        f_lib = std::max(f_lib, std::abs(f(x)));
    }
    note(o, f_direct <= 1e-14 && f_lib <= 1e-14, fmt("max |f(root)| = %.3g", std::max(f_direct, f_lib)));
    return o;
}

Outcome bistable_basins() {
    Outcome o;
    const std::pair<double, double> runs[] = {{0.05, 0.25}, {0.3, 0.25}, {0.6, 0.75}, {0.9, 0.75}};
    double worst = 0;
    for (auto [start, limit] : runs) {
        auto end = evolve(corpus("bistable"), Distribution{start, 1 - start}, 50.0).final_state();
        worst = std::max(worst, std::abs(end[0] - limit));
    }
    note(o, worst <= 1e-4, fmt("max distance to limit %.3g", worst));
    return o;
}

Outcome irreducible_not_ergodic() {
    Outcome o;
    auto spec = corpus("bistable");
    auto cert = certify_ergodic_2(spec);
    std::size_t roots = 0;
    for (const auto& w : cert.witnesses) roots += w.kind == "root";
    note(o, cert.label() == "REFUTED-uniqueness", cert.label());
    note(o, roots == 3, std::to_string(roots) + " root witnesses");
    std::mt19937_64 rng(2024);
    int irreducible_count = 0;
    for (int i = 0; i < 100; ++i) irreducible_count += irreducible_at(spec, random_point(rng, 2));
    note(o, irreducible_count == 100, std::to_string(irreducible_count) + "/100 irreducible");
    return o;
}

Outcome consumer_unique() {
    Outcome o;
    auto cert = certify_unique(corpus("consumer"), SimplexGrid(3, 40), 1e-6);
    note(o, cert.label() == "CERTIFIED", cert.label());
    const double min_det = cert.find_evidence("min_abs_det").value_or(0.0);
    note(o, min_det > 1e-8, fmt("min |det M| = %.6f", min_det));
    return o;
}

Outcome consumer_ergodic() {
    Outcome o;
    auto spec = corpus("consumer");
    auto cert = certify_ergodic_3(spec, SimplexGrid(3, 40));
    note(o, cert.label() == "CERTIFIED", cert.label());
    const double div_max = cert.find_evidence("divergence_max").value_or(1.0);
    const double det = cert.find_evidence("jacobian_det").value_or(0.0);
    note(o, div_max < 0, fmt("max divergence %.4f", div_max));
    note(o, det > 0, fmt("det J(m_bar) = %.4f", det));
    if (!cert.stationary_point) {
        note(o, false, "no stationary point");
        return o;
    }
    std::mt19937_64 rng(77);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        auto end = evolve(spec, random_point(rng, 3), 100.0).final_state();
        worst = std::max(worst, max_abs_diff(end.probs(), *cert.stationary_point));
    }
    note(o, worst <= 1e-4, fmt("10 runs within %.3g of m_bar", worst));
    return o;
}

Outcome constant_regression() {
    Outcome o;
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> rate(0.1, 3.0);
    double flow_err = 0, null_err = 0, det_err = 0;
    int certified = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t s = 2 + trial % 3;
        const auto n = static_cast<Eigen::Index>(s);
        Matrix q = Matrix::Zero(n, n);
        oracle::Dense d(s, std::vector<double>(s, 0.0));
        for (std::size_t i = 0; i < s; ++i) {
            double row = 0;
            for (std::size_t j = 0; j < s; ++j) {
                if (i == j) continue;
                d[i][j] = rate(rng);
                row += d[i][j];
            }
            d[i][i] = -row;
            for (std::size_t j = 0; j < s; ++j) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[i][j];
        }
        auto spec = GeneratorSpec::constant(q);

        auto m0 = random_point(rng, s);
        IntegratorControls controls;
        controls.sample_every = 0.5;
        auto traj = evolve(spec, m0, 5.0, controls);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times()[k];
            if (t != 0.5 && t != 1.0 && t != 5.0) continue;
            auto expected = oracle::row_times(m0.vector(), oracle::expm(d, t));
            flow_err = std::max(flow_err, max_abs_diff(traj.states()[k], expected));
        }

        auto set = find_invariant(spec, SimplexGrid(s, 4));
        auto pi = oracle::kirchhoff_stationary(d);
        if (set.size() != 1) {
            null_err = INFINITY;
        } else {
            null_err = std::max(null_err, max_abs_diff(set.results[0].point.probs(), pi));
        }

        auto cert = certify_unique(spec, SimplexGrid(s, 8));
        certified += cert.verdict == Verdict::certified;
        const double expected_det = s % 2 == 0 ? -1.0 : 1.0;
        for (const auto& m : SimplexGrid(s, 8))
            det_err = std::max(det_err, std::abs(build_M(spec, m).determinant() - expected_det));
    }
    note(o, flow_err <= 1e-8, fmt("flow vs expm %.3g", flow_err));
    note(o, null_err <= 1e-10, fmt("invariant vs null space %.3g", null_err));
    note(o, certified == 20, std::to_string(certified) + "/20 certified");
    note(o, det_err <= 1e-8, fmt("det M error %.3g", det_err));
    return o;
}

Outcome property_suites() {
    Outcome o;
    // simplex invariance and tangent-cone audit on corpus runs
    double violation = 0;
    bool clean = true;
    std::mt19937_64 rng(4242);
    struct Run {
        std::string name;
        Distribution m0;
        double horizon;
    };
    std::vector<Run> runs{{"oscillator", {0.2, 0.4, 0.4}, 2 * std::numbers::pi},
                          {"oscillator", {0.3, 0.35, 0.35}, 10.0}};
    for (double x : {0.0, 0.05, 0.3, 0.6, 0.9, 1.0}) runs.push_back({"bistable", Distribution{x, 1 - x}, 50.0});
    for (int i = 0; i < 5; ++i) runs.push_back({"consumer", random_point(rng, 3), 100.0});
    runs.push_back({"consumer", Distribution::vertex(3, 0), 20.0});
    for (const auto& run : runs) {
        auto spec = corpus(run.name);
        auto traj = evolve(spec, run.m0, run.horizon);
        auto audit = flow_invariance_audit(traj, spec);
        violation = std::max(violation, audit.max_violation);
        clean = clean && audit.clean();
    }
    note(o, violation <= 1e-9, fmt("max simplex violation %.3g", violation));
    note(o, clean, clean ? "audits CLEAN" : "audit failures");

    // central differences: error ratio under step halving
    auto spec = corpus("consumer");
    auto sys = reduced_system(spec);
    double worst_ratio = INFINITY;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> v = random_point(rng, 3).vector();
        for (auto& x : v) x = 0.05 + 0.85 * x;
        Distribution m(v);
        Matrix a = build_M(spec, m, 2e-2), b = build_M(spec, m, 1e-2), c = build_M(spec, m, 5e-3);
        worst_ratio = std::min(worst_ratio, (a - b).cwiseAbs().maxCoeff() / (b - c).cwiseAbs().maxCoeff());
        Eigen::Matrix2d ja = sys.jacobian(m[0], m[1], 2e-2), jb = sys.jacobian(m[0], m[1], 1e-2),
                        jc = sys.jacobian(m[0], m[1], 5e-3);
        const double jd = (jb - jc).cwiseAbs().maxCoeff();
        // the reduced system is quadratic in m, so its differences are exact
        if (jd > 1e-12) worst_ratio = std::min(worst_ratio, (ja - jb).cwiseAbs().maxCoeff() / jd);
    }
    note(o, worst_ratio >= 3.5, fmt("min halving ratio %.3f", worst_ratio));

    // Monte Carlo occupancy
    PathSampler sampler(corpus("bistable"), Distribution{0.9, 0.1}, 50.0);
    int in_first = 0;
    const int paths = 10000;
    for (int i = 0; i < paths; ++i)
        in_first += sampler.sample(std::nullopt, static_cast<std::uint64_t>(i)).state_at(50.0) == 0;
    const double fraction = in_first / static_cast<double>(paths);
    note(o, std::abs(fraction - 0.75) <= 0.02, fmt("state-1 occupancy %.4f", fraction));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;  // 0: no runtime bound
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {1, "oscillator-period", 1.0, oscillator_orbit},
        {2, "bistable-stationary-set", 0.0, bistable_set},
        {3, "bistable-basins", 1.0, bistable_basins},
        {4, "irreducible-not-ergodic", 0.0, irreducible_not_ergodic},
        {5, "consumer-uniqueness", 30.0, consumer_unique},
        {6, "consumer-ergodicity", 30.0, consumer_ergodic},
        {7, "constant-generator-regression", 0.0, constant_regression},
        {8, "property-suites", 0.0, property_suites},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0) note(o, seconds < c.budget_seconds, fmt("%.2fs", seconds) + fmt(" (budget %.0fs)", c.budget_seconds));
        else o.detail += fmt("; %.2fs", seconds);
        failures += !o.pass;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
