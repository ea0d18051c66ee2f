#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlmc/error.hpp"
#include "nlmc/semigroup.hpp"
#include "oracles.hpp"

using namespace nlmc;

namespace {

Matrix random_rates(std::mt19937_64& rng, std::size_t s) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        for (Eigen::Index j = 0; j < q.cols(); ++j)
            if (i != j) q(i, j) = u(rng);
        q(i, i) = -q.row(i).sum();
    }
    return q;
}

oracle::Dense to_dense(const Matrix& q) {
    oracle::Dense d(static_cast<std::size_t>(q.rows()), std::vector<double>(static_cast<std::size_t>(q.cols())));
    for (Eigen::Index i = 0; i < q.rows(); ++i)
        for (Eigen::Index j = 0; j < q.cols(); ++j) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = q(i, j);
    return d;
}

Distribution random_point(std::mt19937_64& rng, std::size_t s) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(s);
    double total = 0;
    for (auto& x : v) total += (x = e(rng));
    for (auto& x : v) x /= total;
    return Distribution(v);
}

}  // namespace

TEST_CASE("constant generators follow the matrix exponential") {
    std::mt19937_64 rng(17);
    for (std::size_t s : {2u, 3u, 4u, 5u}) {
        Matrix q = random_rates(rng, s);
        auto spec = GeneratorSpec::constant(q);
        auto m0 = random_point(rng, s);
        IntegratorControls tight;
        tight.rtol = 1e-11;
        tight.atol = 1e-13;
        tight.sample_every = 0.5;
        auto traj = evolve(spec, m0, 5.0, tight);
        REQUIRE(traj.size() == 11);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            auto expected = oracle::row_times(m0.vector(), oracle::expm(to_dense(q), traj.times()[i]));
            CHECK(max_abs_diff(traj.states()[i], expected) <= 1e-9);
        }
    }
}

TEST_CASE("sample times are hit exactly") {
    auto traj = evolve(corpus("bistable"), Distribution{0.9, 0.1}, 1.0);
    CHECK(traj.size() == 1001);
    CHECK(traj.times().front() == 0.0);
    CHECK(traj.times().back() == 1.0);
    CHECK(traj.times()[500] == 0.5);
    IntegratorControls c;
    c.sample_every = 0.3;
    auto coarse = evolve(corpus("bistable"), Distribution{0.9, 0.1}, 1.0, c);
    CHECK(coarse.times() == std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0});
}

TEST_CASE("semigroup property") {
    auto spec = corpus("consumer");
    Distribution m0{0.7, 0.1, 0.2};
    IntegratorControls tight;
    tight.rtol = 1e-11;
    tight.atol = 1e-13;
    auto direct = evolve(spec, m0, 3.0, tight).final_state();
    auto half = evolve(spec, m0, 1.2, tight).final_state();
    auto composed = evolve(spec, half, 1.8, tight).final_state();
    CHECK(max_abs_diff(direct.probs(), composed.probs()) <= 1e-9);
}

TEST_CASE("bistable flow matches the scalar ODE") {
    // integrate dx/dt = f(x) with classical RK4 at a tiny step as the reference
    double x = 0.05;
    const double dt = 1e-4;
    for (int i = 0; i < 20000; ++i) {
        double k1 = oracle::bistable_drift(x);
        double k2 = oracle::bistable_drift(x + dt / 2 * k1);
        double k3 = oracle::bistable_drift(x + dt / 2 * k2);
        double k4 = oracle::bistable_drift(x + dt * k3);
        x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    IntegratorControls tight;
    tight.rtol = 1e-11;
    tight.atol = 1e-13;
    auto traj = evolve(corpus("bistable"), Distribution{0.05, 0.95}, 2.0, tight);
    CHECK(traj.final_state()[0] == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("oscillator closes its orbit after 2 pi") {
    Distribution m0{0.2, 0.4, 0.4};
    auto traj = evolve(corpus("oscillator"), m0, 2 * std::numbers::pi);
    CHECK(max_abs_diff(traj.final_state().probs(), m0.probs()) <= 1e-4);
    CHECK(traj.min_component() >= 0.12);
    auto audit = flow_invariance_audit(traj, corpus("oscillator"));
    CHECK(audit.clean());
}

TEST_CASE("dense flow agrees with the sampled trajectory") {
    auto spec = corpus("consumer");
    Distribution m0{0.1, 0.1, 0.8};
    auto traj = evolve(spec, m0, 4.0);
    auto flow = evolve_dense(spec, m0, 4.0);
    CHECK(flow.horizon() == 4.0);
    for (std::size_t i = 0; i < traj.size(); i += 37)
        CHECK(max_abs_diff(flow.at(traj.times()[i]), traj.states()[i]) <= 1e-6);
    CHECK(max_abs_diff(flow.at(0.0), m0.probs()) == 0.0);
}

TEST_CASE("evolve rejects bad arguments") {
    auto spec = corpus("bistable");
    CHECK_THROWS_AS(evolve(spec, Distribution::uniform(3), 1.0), InputError);
    CHECK_THROWS_AS(evolve(spec, Distribution::uniform(2), 0.0), InputError);
    IntegratorControls bad;
    bad.rtol = 0;
    CHECK_THROWS_AS(evolve(spec, Distribution::uniform(2), 1.0, bad), InputError);
}

TEST_CASE("step limit raises IntegrationDiverged") {
    IntegratorControls c;
    c.max_steps = 3;
    CHECK_THROWS_AS(evolve(corpus("consumer"), Distribution::uniform(3), 100.0, c), IntegrationDiverged);
}

TEST_CASE("audit flags corrupted trajectories") {
    auto spec = corpus("bistable");
    Trajectory bad({0.0, 1.0}, {{0.5, 0.5}, {0.7, 0.4}}, spec.id());
    auto report = flow_invariance_audit(bad, spec);
    CHECK_FALSE(report.clean());
    CHECK(report.invalid_states == std::vector<std::size_t>{1});

    // non-negative rates always point into the simplex at a vertex
    auto leaving = GeneratorSpec::polynomial(
        2, {PolynomialCell{1, 0, {{{0, 0}, 1.0}}}, PolynomialCell{0, 1, {{{0, 0}, 1.0}}}});
    Trajectory vertex({0.0}, {{0.0, 1.0}}, leaving.id());
    CHECK(flow_invariance_audit(vertex, leaving).clean());
    CHECK_THROWS_AS(Trajectory({0.0, 0.0}, {{1.0}, {1.0}}, "x"), InputError);
}

TEST_CASE("jump paths are deterministic in the seed") {
    auto spec = corpus("consumer");
    PathSampler sampler(spec, Distribution::uniform(3), 10.0);
    auto a = sampler.sample(std::nullopt, 42);
    auto b = sampler.sample(std::nullopt, 42);
    auto c = sampler.sample(std::nullopt, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a == sample_path(spec, Distribution::uniform(3), std::nullopt, 10.0, 42));
    CHECK(std::is_sorted(a.jump_times.begin(), a.jump_times.end()));
    for (std::size_t k = 0; k < a.states_visited.size(); ++k) {
        std::size_t before = k == 0 ? a.initial_state : a.states_visited[k - 1];
        CHECK(a.states_visited[k] != before);
        // consumer has no 2 -> 1 transition
        CHECK_FALSE((before == 1 && a.states_visited[k] == 0));
    }
    double total = 0;
    for (std::size_t i = 0; i < 3; ++i) total += a.occupation_time(i);
    CHECK(total == doctest::Approx(10.0));
    CHECK(sampler.bound() > 0.0);
}

TEST_CASE("constant two-state chain: occupancy matches the exponential law") {
    // Q12 = a, Q21 = b: P(X_t = 1 | X_0 = 1) = b/(a+b) + a/(a+b) e^{-(a+b)t}
    const double a = 1.5, b = 0.5, t = 0.7;
    Matrix q(2, 2);
    q << -a, a, b, -b;
    auto spec = GeneratorSpec::constant(q);
    PathSampler sampler(spec, Distribution{1.0, 0.0}, t);
    const int n = 20000;
    int in_first = 0;
    for (int i = 0; i < n; ++i)
        if (sampler.sample(std::size_t{0}, static_cast<std::uint64_t>(i)).state_at(t) == 0) ++in_first;
    const double p = b / (a + b) + a / (a + b) * std::exp(-(a + b) * t);
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(in_first / double(n) - p) <= 5 * sd);
}

TEST_CASE("state_at and occupation on a hand-built path") {
    JumpPath p;
    p.initial_state = 1;
    p.jump_times = {1.0, 2.5};
    p.states_visited = {0, 1};
    p.horizon = 4.0;
    CHECK(p.state_at(0.5) == 1);
    CHECK(p.state_at(1.0) == 0);
    CHECK(p.state_at(3.0) == 1);
    CHECK(p.occupation_time(0) == doctest::Approx(1.5));
    CHECK(p.occupation_time(1) == doctest::Approx(2.5));
}
