#include "nlmc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "nlmc/error.hpp"

namespace nlmc {

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty() || probs_.size() > kMaxStates)
        throw InputError("distribution must have between 1 and 16 states, got " +
                         std::to_string(probs_.size()));
    double sum = 0.0;
    for (double& p : probs_) {
        if (!std::isfinite(p)) throw InputError("distribution entry is not finite");
        if (p < -kSimplexTol)
            throw InputError("distribution entry " + std::to_string(p) + " is negative");
        p = std::max(p, 0.0);
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRenormalizeTol)
        throw InputError("distribution entries sum to " + std::to_string(sum));
    if (sum != 1.0)
        for (double& p : probs_) p /= sum;
}

Distribution Distribution::uniform(std::size_t states) {
    return Distribution(std::vector<double>(states, 1.0 / static_cast<double>(states)));
}

Distribution Distribution::vertex(std::size_t states, std::size_t state) {
    if (state >= states) throw InputError("vertex index out of range");
    std::vector<double> p(states, 0.0);
    p[state] = 1.0;
    return Distribution(std::move(p));
}

double Distribution::min() const { return *std::min_element(probs_.begin(), probs_.end()); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double simplex_violation(std::span<const double> v) {
    double sum = 0.0, neg = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        sum += x;
        neg = std::max(neg, -x);
    }
    return std::max(neg, std::abs(sum - 1.0));
}

// ---------------------------------------------------------------------------

std::size_t SimplexGrid::expected_size(std::size_t dimension, int resolution) {
    // binomial(k + S - 1, S - 1), computed incrementally to stay exact
    std::size_t n = static_cast<std::size_t>(resolution) + dimension - 1;
    std::size_t r = dimension - 1;
    std::size_t result = 1;
    for (std::size_t i = 1; i <= r; ++i) result = result * (n - r + i) / i;
    return result;
}

SimplexGrid::SimplexGrid(std::size_t dimension, int resolution)
    : dimension_(dimension), resolution_(resolution) {
    if (dimension == 0 || dimension > kMaxStates) throw InputError("grid dimension out of range");
    if (resolution < 1) throw InputError("grid resolution must be positive");

    points_.reserve(expected_size(dimension, resolution));
    counts_.reserve(expected_size(dimension, resolution));
    std::vector<int> c(dimension, 0);
    const double k = resolution;

    std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int left) {
        if (pos + 1 == dimension) {
            c[pos] = left;
            std::vector<double> p(dimension);
            for (std::size_t i = 0; i < dimension; ++i) p[i] = c[i] / k;
            points_.emplace_back(std::move(p));
            counts_.push_back(c);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            c[pos] = v;
            fill(pos + 1, left - v);
        }
    };
    fill(0, resolution);
}

// ---------------------------------------------------------------------------

bool tangent_cone_member(const Distribution& m, std::span<const double> y) {
    if (y.size() != m.size()) throw InputError("tangent_cone_member: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sum += y[i];
        if (m[i] <= kSimplexTol && y[i] < -kTangentConeTol) return false;
    }
    return std::abs(sum) <= kTangentConeTol;
}

Distribution project_to_simplex(std::span<const double> v, double max_drift) {
    if (v.empty()) throw InputError("project_to_simplex: empty vector");
    for (double x : v)
        if (!std::isfinite(x)) throw IntegrationDiverged("project_to_simplex: non-finite entry");

    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }

    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::max(v[i] - theta, 0.0);

    const double drift = max_abs_diff(v, p);
    if (drift > max_drift)
        throw IntegrationDiverged("simplex drift " + std::to_string(drift) +
                                  " exceeds repair budget");
    return Distribution(std::move(p));
}

}  // namespace nlmc
