#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nlmc {

/// Membership tolerance for simplex coordinates.
inline constexpr double kSimplexTol = 1e-12;
/// Largest |sum - 1| the Distribution constructor silently renormalizes.
inline constexpr double kRenormalizeTol = 1e-9;
/// Largest sup-norm drift project_to_simplex repairs.
inline constexpr double kProjectionRepairTol = 1e-6;
/// Tolerance of the tangent-cone membership test.
inline constexpr double kTangentConeTol = 1e-10;
inline constexpr std::size_t kMaxStates = 16;

/// A point of the probability simplex P(S).
///
/// Entries below -kSimplexTol are rejected, the rest clamped at zero; a sum
/// within kRenormalizeTol of one is renormalized, anything else is rejected.
class Distribution {
public:
    explicit Distribution(std::vector<double> probs);
    Distribution(std::initializer_list<double> probs)
        : Distribution(std::vector<double>(probs)) {}

    static Distribution uniform(std::size_t states);
    /// Point mass on `state`.
    static Distribution vertex(std::size_t states, std::size_t state);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }
    const std::vector<double>& vector() const noexcept { return probs_; }

    double min() const;

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    std::vector<double> probs_;
};

/// Sup-norm distance between two equally sized vectors.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// How far `v` is from being a distribution: max of (-min entry) and |sum - 1|.
double simplex_violation(std::span<const double> v);

/// All distributions whose entries are multiples of 1/resolution, in
/// lexicographic order of their integer counts.
class SimplexGrid {
public:
    SimplexGrid(std::size_t dimension, int resolution);

    std::size_t dimension() const noexcept { return dimension_; }
    int resolution() const noexcept { return resolution_; }
    std::size_t size() const noexcept { return points_.size(); }

    const std::vector<Distribution>& points() const noexcept { return points_; }
    const Distribution& operator[](std::size_t i) const { return points_[i]; }
    /// Integer counts c with points()[i] = c / resolution.
    const std::vector<int>& counts(std::size_t i) const { return counts_[i]; }

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

    /// binomial(resolution + dimension - 1, dimension - 1)
    static std::size_t expected_size(std::size_t dimension, int resolution);

private:
    std::size_t dimension_;
    int resolution_;
    std::vector<Distribution> points_;
    std::vector<std::vector<int>> counts_;
};

/// Bouligand tangent-cone membership: y sums to zero and points inward at
/// every coordinate where m vanishes.
bool tangent_cone_member(const Distribution& m, std::span<const double> y);

/// Euclidean projection onto the simplex (sorted-threshold algorithm).
/// Throws IntegrationDiverged when the sup-norm distance moved exceeds
/// `max_drift`.
Distribution project_to_simplex(std::span<const double> v,
                                double max_drift = kProjectionRepairTol);

}  // namespace nlmc
