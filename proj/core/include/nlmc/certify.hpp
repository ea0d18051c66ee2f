#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlmc/generator.hpp"
#include "nlmc/simplex.hpp"
#include "nlmc/stationary.hpp"

namespace nlmc {

inline constexpr double kDetTol = 1e-8;
inline constexpr double kDefaultFdStep = 1e-6;
inline constexpr double kDivergenceTol = 1e-8;
inline constexpr double kSaddleTol = 1e-8;
/// Sign margin of the S = 2 drift scan.
inline constexpr double kScanMargin = 1e-10;
inline constexpr double kRootTol = 1e-12;
inline constexpr int kDefaultRootGrid = 10'000;
/// Width of the margin around the S = 3 chart triangle swept for the
/// divergence condition.
inline constexpr double kChartMargin = 0.02;

enum class Claim { unique_invariant, strongly_ergodic };
enum class Verdict { certified, inconclusive, refuted };

std::string to_string(Claim claim);
std::string to_string(Verdict verdict);

struct Witness {
    std::string kind;
    std::vector<double> point;
    double value = 0.0;
};

/// Outcome of a grid-based check of a sufficient criterion. Certificates are
/// grid-certified: the hypotheses are verified on a finite grid with the
/// recorded resolution and margins, not proven for every point.
struct Certificate {
    Claim claim = Claim::unique_invariant;
    Verdict verdict = Verdict::inconclusive;
    /// Which hypothesis decided the verdict, e.g. "precondition",
    /// "uniqueness", "determinant-sign", "divergence", "saddle".
    std::string qualifier;
    std::string generator_id;
    int grid_resolution = 0;
    /// Tolerances used, in a stable order.
    std::vector<std::pair<std::string, double>> tolerances;
    /// Numerical evidence, in a stable order.
    std::vector<std::pair<std::string, double>> evidence;
    std::optional<std::vector<double>> stationary_point;
    std::vector<Witness> witnesses;
    std::vector<std::string> notes;

    /// Label such as "CERTIFIED" or "REFUTED-uniqueness".
    std::string label() const;
    std::optional<double> find_evidence(const std::string& key) const;
};

/// M(m) = [df_a/dm_b - df_a/dm_S]_{a,b < S} for f(m) = x(m) - m, by central
/// differences along the simplex directions e_b - e_S with step
/// h * (1 + |m|_inf). Throws ReducibleGenerator at a reducible m and
/// CertificateEvaluationError when a stencil point cannot be evaluated.
Matrix build_M(const GeneratorSpec& spec, const Distribution& m, double h = kDefaultFdStep);

/// Determinant-sign sweep of M over the grid (Brouwer degree criterion).
Certificate certify_unique(const GeneratorSpec& spec, const SimplexGrid& grid,
                           double h = kDefaultFdStep);

/// S = 2: f(m1) = m1 Q_11(m1, 1 - m1) + (1 - m1) Q_21(m1, 1 - m1).
std::function<double(double)> scalar_drift(const GeneratorSpec& spec);

/// S = 2 strong ergodicity: a single root of the scalar drift with f > 0 to
/// its left and f < 0 to its right.
Certificate certify_ergodic_2(const GeneratorSpec& spec, int root_grid = kDefaultRootGrid);

/// The planar system obtained for S = 3 by eliminating m3 = 1 - m1 - m2:
///   f1 = Q31 + (Q11 - Q31) m1 + (Q21 - Q31) m2
///   f2 = Q32 + (Q12 - Q32) m1 + (Q22 - Q32) m2,   Q evaluated at (m1, m2, 1 - m1 - m2).
class ReducedSystem {
public:
    explicit ReducedSystem(GeneratorSpec spec);

    std::array<double, 2> operator()(double m1, double m2) const;
    /// Central-difference Jacobian [[df1/dm1, df1/dm2], [df2/dm1, df2/dm2]].
    Eigen::Matrix2d jacobian(double m1, double m2, double h = kDefaultFdStep) const;
    double divergence(double m1, double m2, double h = kDefaultFdStep) const;
    const GeneratorSpec& spec() const noexcept { return spec_; }

private:
    GeneratorSpec spec_;
};

ReducedSystem reduced_system(const GeneratorSpec& spec);

/// S = 3 strong ergodicity: unique invariant distribution, divergence of the
/// reduced system non-vanishing with uniform sign on the chart triangle
/// widened by kChartMargin, and a non-saddle Jacobian at the invariant point.
Certificate certify_ergodic_3(const GeneratorSpec& spec, const SimplexGrid& grid,
                              double h = kDefaultFdStep, const StationaryControls& search = {});

}  // namespace nlmc
