#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlmc/simplex.hpp"

namespace nlmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Off-diagonal rates above -kRateClampTol are clamped to zero.
inline constexpr double kRateClampTol = 1e-10;
/// Row-sum tolerance of a conservative rate matrix.
inline constexpr double kRowSumTol = 1e-9;
/// Rates at or below this are structural zeros for irreducibility.
inline constexpr double kDefaultRateFloor = 1e-9;
inline constexpr int kMaxPolynomialDegree = 8;
/// Built-in generators are validated on at least this resolution.
inline constexpr int kMinValidationResolution = 20;

/// A conservative transition rate matrix: non-negative off-diagonal entries,
/// zero row sums.
class RateMatrix {
public:
    /// Clamps small negative off-diagonals; throws InputError on any other
    /// violation of the invariants.
    explicit RateMatrix(Matrix entries);

    std::size_t size() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    const Matrix& entries() const noexcept { return q_; }
    double operator()(std::size_t i, std::size_t j) const {
        return q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    /// max_i |Q_ii|
    double max_exit_rate() const;

private:
    Matrix q_;
};

struct PolynomialTerm {
    std::vector<int> exponents;  // one per state
    double coefficient = 0.0;

    int degree() const;
    friend bool operator==(const PolynomialTerm&, const PolynomialTerm&) = default;
};

/// Off-diagonal rate Q_{from,to}(m) = sum of coefficient * prod m_k^e_k.
/// Indices are 0-based in memory; the generator file stores them 1-based.
struct PolynomialCell {
    std::size_t from = 0;
    std::size_t to = 0;
    std::vector<PolynomialTerm> terms;

    double evaluate(std::span<const double> m) const;
    int degree() const;
    friend bool operator==(const PolynomialCell&, const PolynomialCell&) = default;
};

using ParameterMap = std::map<std::string, double>;

/// An immutable nonlinear generator m -> Q(m).
///
/// Two kinds exist. Built-ins are closed-form corpus generators; polynomial
/// generators carry off-diagonal cells only and derive the diagonal, so they
/// are conservative by construction.
class GeneratorSpec {
public:
    enum class Kind { builtin, polynomial };
    using RateFunction = std::function<void(std::span<const double>, Matrix&)>;

    static GeneratorSpec polynomial(std::size_t dimension, std::vector<PolynomialCell> cells,
                                    std::string metadata_json = "{}");
    /// Constant generator, stored as a degree-0 polynomial.
    static GeneratorSpec constant(const Matrix& q);
    /// `rates` must fill every off-diagonal entry; the diagonal is derived.
    static GeneratorSpec builtin(std::string name, ParameterMap parameters, std::size_t dimension,
                                 RateFunction rates, bool clamped_extension);

    std::size_t dimension() const noexcept;
    Kind kind() const noexcept;
    const std::string& name() const noexcept;
    const ParameterMap& parameters() const noexcept;
    const std::vector<PolynomialCell>& cells() const noexcept;
    const std::string& metadata_json() const noexcept;
    /// True when rates outside some region are defined by clamping the
    /// argument (not an analytic continuation).
    bool clamped_extension() const noexcept;
    /// Stable identifier, e.g. "consumer(b=1,e=1,eps=0.1,lambda=1)".
    std::string id() const;

    /// Raw rates at any point of R^S; throws GeneratorEvaluationError on a
    /// non-finite entry. No sign clamping is applied.
    Matrix rates(std::span<const double> m) const;
    /// Rates at a distribution, checked against the RateMatrix invariants.
    RateMatrix eval(const Distribution& m) const;
    /// Marginal drift f_j(m) = sum_i m_i Q_ij(m).
    Vector drift(std::span<const double> m) const;

private:
    struct Impl;
    explicit GeneratorSpec(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

struct ValidationFailure {
    Distribution point;
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
    std::string reason;  // "negative-rate", "row-sum" or "non-finite"
};

struct ValidationReport {
    std::size_t points_checked = 0;
    int resolution = 0;
    std::vector<ValidationFailure> failures;

    bool valid() const noexcept { return failures.empty(); }
};

ValidationReport validate(const GeneratorSpec& spec, const SimplexGrid& grid);

/// Largest finite-difference slope |Q_ij(m) - Q_ij(m')| / |m - m'|_1 over
/// grid neighbours (one unit of mass moved between two coordinates). A lower
/// bound on the Lipschitz constant.
double lipschitz_estimate(const GeneratorSpec& spec, const SimplexGrid& grid);

/// Strong connectivity of the graph with an edge i->j whenever Q_ij > rate_floor.
bool irreducible(const Matrix& q, double rate_floor = kDefaultRateFloor);
bool irreducible_at(const GeneratorSpec& spec, const Distribution& m,
                    double rate_floor = kDefaultRateFloor);

/// Built-in generators: "consumer" (parameters b, e, eps, lambda),
/// "oscillator" and "bistable".
GeneratorSpec corpus(const std::string& name, const ParameterMap& parameters = {});
std::vector<std::string> corpus_names();

/// Lower clamp applied to every coordinate inside the oscillator rates.
inline constexpr double kOscillatorFloor = 0.1;

}  // namespace nlmc
