#include "nlmc/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "nlmc/error.hpp"

namespace nlmc {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void derive_diagonal(Matrix& q) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        q(i, i) = 0.0;
        q(i, i) = -q.row(i).sum();
    }
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // prefer the shortest representation that round-trips
    for (int precision = 1; precision <= 17; ++precision) {
        char shorter[32];
        std::snprintf(shorter, sizeof shorter, "%.*g", precision, x);
        if (std::strtod(shorter, nullptr) == x) return shorter;
    }
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

RateMatrix::RateMatrix(Matrix entries) : q_(std::move(entries)) {
    if (q_.rows() != q_.cols() || q_.rows() == 0)
        throw InputError("rate matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < q_.rows(); ++i) {
        for (Eigen::Index j = 0; j < q_.cols(); ++j) {
            if (!std::isfinite(q_(i, j))) throw InputError("rate matrix entry is not finite");
            if (i == j) continue;
            if (q_(i, j) < -kRateClampTol)
                throw InputError("negative off-diagonal rate " + std::to_string(q_(i, j)));
            q_(i, j) = std::max(q_(i, j), 0.0);
        }
        if (std::abs(q_.row(i).sum()) > kRowSumTol)
            throw InputError("rate matrix row " + std::to_string(i) + " does not sum to zero");
        // clamping may have moved the row sum; keep it exactly conservative
        q_(i, i) = 0.0;
        q_(i, i) = -q_.row(i).sum();
    }
}

double RateMatrix::max_exit_rate() const { return q_.diagonal().cwiseAbs().maxCoeff(); }

int PolynomialTerm::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

double PolynomialCell::evaluate(std::span<const double> m) const {
    double value = 0.0;
    for (const auto& term : terms) {
        double product = term.coefficient;
        for (std::size_t k = 0; k < term.exponents.size(); ++k)
            for (int e = 0; e < term.exponents[k]; ++e) product *= m[k];
        value += product;
    }
    return value;
}

int PolynomialCell::degree() const {
    int d = 0;
    for (const auto& term : terms) d = std::max(d, term.degree());
    return d;
}

// ---------------------------------------------------------------------------

struct GeneratorSpec::Impl {
    std::size_t dimension = 0;
    Kind kind = Kind::polynomial;
    std::string name;
    ParameterMap parameters;
    std::vector<PolynomialCell> cells;
    std::string metadata_json = "{}";
    bool clamped = false;
    RateFunction rates;
};

GeneratorSpec::GeneratorSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

GeneratorSpec GeneratorSpec::polynomial(std::size_t dimension, std::vector<PolynomialCell> cells,
                                        std::string metadata_json) {
    if (dimension == 0 || dimension > kMaxStates)
        throw InputError("generator dimension must be between 1 and 16");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& cell : cells) {
        if (cell.from >= dimension || cell.to >= dimension)
            throw InputError("polynomial cell index out of range");
        if (cell.from == cell.to)
            throw InputError("polynomial cells are off-diagonal; diagonals are derived");
        if (!seen.emplace(cell.from, cell.to).second)
            throw InputError("duplicate polynomial cell (" + std::to_string(cell.from + 1) + "," +
                             std::to_string(cell.to + 1) + ")");
        for (const auto& term : cell.terms) {
            if (term.exponents.size() != dimension)
                throw InputError("monomial exponent vector has wrong length");
            if (std::any_of(term.exponents.begin(), term.exponents.end(),
                            [](int e) { return e < 0; }))
                throw InputError("monomial exponents must be non-negative");
            if (!std::isfinite(term.coefficient))
                throw InputError("monomial coefficient is not finite");
        }
        if (cell.degree() > kMaxPolynomialDegree)
            throw InputError("polynomial cell total degree exceeds 8");
    }

    auto impl = std::make_shared<Impl>();
    impl->dimension = dimension;
    impl->kind = Kind::polynomial;
    impl->name = "polynomial";
    impl->cells = std::move(cells);
    impl->metadata_json = std::move(metadata_json);
    impl->rates = [cells = impl->cells, dimension](std::span<const double> m, Matrix& q) {
        // powers[k][e] = m_k^e, shared across all monomials
        std::array<std::array<double, kMaxPolynomialDegree + 1>, kMaxStates> powers{};
        for (std::size_t k = 0; k < dimension; ++k) {
            powers[k][0] = 1.0;
            for (int e = 1; e <= kMaxPolynomialDegree; ++e) powers[k][e] = powers[k][e - 1] * m[k];
        }
        for (const auto& cell : cells) {
            double value = 0.0;
            for (const auto& term : cell.terms) {
                double product = term.coefficient;
                for (std::size_t k = 0; k < dimension; ++k) product *= powers[k][term.exponents[k]];
                value += product;
            }
            q(idx(cell.from), idx(cell.to)) = value;
        }
    };
    return GeneratorSpec(std::move(impl));
}

GeneratorSpec GeneratorSpec::constant(const Matrix& q) {
    if (q.rows() != q.cols()) throw InputError("constant generator must be square");
    const auto s = static_cast<std::size_t>(q.rows());
    std::vector<PolynomialCell> cells;
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
            if (i != j && q(idx(i), idx(j)) != 0.0)
                cells.push_back({i, j, {{std::vector<int>(s, 0), q(idx(i), idx(j))}}});
    return polynomial(s, std::move(cells));
}

GeneratorSpec GeneratorSpec::builtin(std::string name, ParameterMap parameters,
                                     std::size_t dimension, RateFunction rates,
                                     bool clamped_extension) {
    if (dimension == 0 || dimension > kMaxStates)
        throw InputError("generator dimension must be between 1 and 16");
    auto impl = std::make_shared<Impl>();
    impl->dimension = dimension;
    impl->kind = Kind::builtin;
    impl->name = std::move(name);
    impl->parameters = std::move(parameters);
    impl->clamped = clamped_extension;
    impl->rates = std::move(rates);
    return GeneratorSpec(std::move(impl));
}

std::size_t GeneratorSpec::dimension() const noexcept { return impl_->dimension; }
GeneratorSpec::Kind GeneratorSpec::kind() const noexcept { return impl_->kind; }
const std::string& GeneratorSpec::name() const noexcept { return impl_->name; }
const ParameterMap& GeneratorSpec::parameters() const noexcept { return impl_->parameters; }
const std::vector<PolynomialCell>& GeneratorSpec::cells() const noexcept { return impl_->cells; }
const std::string& GeneratorSpec::metadata_json() const noexcept { return impl_->metadata_json; }
bool GeneratorSpec::clamped_extension() const noexcept { return impl_->clamped; }

std::string GeneratorSpec::id() const {
    std::ostringstream out;
    out << impl_->name;
    if (impl_->kind == Kind::polynomial) {
        out << "(S=" << impl_->dimension << ",cells=" << impl_->cells.size() << ")";
    } else if (!impl_->parameters.empty()) {
        out << "(";
        bool first = true;
        for (const auto& [key, value] : impl_->parameters) {
            out << (first ? "" : ",") << key << "=" << format_number(value);
            first = false;
        }
        out << ")";
    }
    return out.str();
}

Matrix GeneratorSpec::rates(std::span<const double> m) const {
    if (m.size() != impl_->dimension)
        throw InputError("generator evaluated at a point of dimension " + std::to_string(m.size()) +
                         ", expected " + std::to_string(impl_->dimension));
    Matrix q = Matrix::Zero(idx(impl_->dimension), idx(impl_->dimension));
    impl_->rates(m, q);
    derive_diagonal(q);
    if (!q.allFinite()) throw GeneratorEvaluationError("generator " + id() + " produced a non-finite rate");
    return q;
}

RateMatrix GeneratorSpec::eval(const Distribution& m) const { return RateMatrix(rates(m.probs())); }

Vector GeneratorSpec::drift(std::span<const double> m) const {
    const Matrix q = rates(m);
    const Eigen::Map<const Vector> mv(m.data(), idx(m.size()));
    return q.transpose() * mv;
}

// ---------------------------------------------------------------------------

ValidationReport validate(const GeneratorSpec& spec, const SimplexGrid& grid) {
    if (grid.dimension() != spec.dimension()) throw InputError("validate: grid dimension mismatch");
    ValidationReport report;
    report.resolution = grid.resolution();
    for (const auto& m : grid) {
        ++report.points_checked;
        Matrix q;
        try {
            q = spec.rates(m.probs());
        } catch (const GeneratorEvaluationError&) {
            report.failures.push_back({m, 0, 0, std::numeric_limits<double>::quiet_NaN(), "non-finite"});
            continue;
        }
        const auto s = spec.dimension();
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j)
                if (i != j && q(idx(i), idx(j)) < -kRateClampTol)
                    report.failures.push_back({m, i, j, q(idx(i), idx(j)), "negative-rate"});
            const double row = q.row(idx(i)).sum();
            if (std::abs(row) > kRowSumTol) report.failures.push_back({m, i, i, row, "row-sum"});
        }
    }
    return report;
}

double lipschitz_estimate(const GeneratorSpec& spec, const SimplexGrid& grid) {
    if (grid.dimension() != spec.dimension())
        throw InputError("lipschitz_estimate: grid dimension mismatch");
    const std::size_t s = spec.dimension();
    const double k = grid.resolution();
    double best = 0.0;
    std::vector<double> neighbour(s);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto& counts = grid.counts(p);
        const Matrix q = spec.rates(grid[p].probs());
        for (std::size_t a = 0; a < s; ++a) {
            if (counts[a] == 0) continue;
            for (std::size_t b = 0; b < s; ++b) {
                if (a == b) continue;
                for (std::size_t i = 0; i < s; ++i) neighbour[i] = counts[i] / k;
                neighbour[a] = (counts[a] - 1) / k;
                neighbour[b] = (counts[b] + 1) / k;
                // l1 distance; only coordinates a and b moved
                const double distance = std::abs(grid[p][a] - neighbour[a]) +
                                        std::abs(grid[p][b] - neighbour[b]);
                const Matrix qn = spec.rates(neighbour);
                best = std::max(best, (q - qn).cwiseAbs().maxCoeff() / distance);
            }
        }
    }
    return best;
}

bool irreducible(const Matrix& q, double rate_floor) {
    const Eigen::Index s = q.rows();
    auto reaches_all = [&](bool forward) {
        std::vector<char> seen(static_cast<std::size_t>(s), 0);
        std::vector<Eigen::Index> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const Eigen::Index i = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < s; ++j) {
                const double rate = forward ? q(i, j) : q(j, i);
                if (i != j && rate > rate_floor && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reaches_all(true) && reaches_all(false);
}

bool irreducible_at(const GeneratorSpec& spec, const Distribution& m, double rate_floor) {
    return irreducible(spec.rates(m.probs()), rate_floor);
}

// ---------------------------------------------------------------------------

namespace {

GeneratorSpec make_consumer(const ParameterMap& given) {
    ParameterMap p{{"b", 1.0}, {"e", 1.0}, {"eps", 0.1}, {"lambda", 1.0}};
    for (const auto& [key, value] : given) {
        if (!p.contains(key)) throw InputError("consumer: unknown parameter '" + key + "'");
        p[key] = value;
    }
    for (const auto& [key, value] : p)
        if (!(value > 0.0)) throw InputError("consumer: parameter '" + key + "' must be positive");

    const double b = p["b"], e = p["e"], eps = p["eps"], lambda = p["lambda"];
    return GeneratorSpec::builtin(
        "consumer", p, 3,
        [=](std::span<const double> m, Matrix& q) {
            q(0, 1) = b;
            q(0, 2) = e * m[0] + eps;
            q(1, 0) = 0.0;
            q(1, 2) = e * m[1] + eps;
            q(2, 0) = lambda;
            q(2, 1) = lambda;
        },
        false);
}

GeneratorSpec make_oscillator(const ParameterMap& given) {
    if (!given.empty()) throw InputError("oscillator takes no parameters");
    constexpr double third = 1.0 / 3.0;
    return GeneratorSpec::builtin(
        "oscillator", {}, 3,
        [](std::span<const double> m, Matrix& q) {
            const double m1 = std::max(m[0], kOscillatorFloor);
            const double m2 = std::max(m[1], kOscillatorFloor);
            const double m3 = std::max(m[2], kOscillatorFloor);
            q(0, 1) = 0.0;
            q(1, 0) = 0.0;
            q(0, 2) = m2 <= third ? (third - m2) / m1 : 0.0;
            q(1, 2) = m1 >= third ? (m1 - third) / m2 : 0.0;
            q(2, 0) = m2 >= third ? (m2 - third) / m3 : 0.0;
            q(2, 1) = m1 <= third ? (third - m1) / m3 : 0.0;
        },
        true);
}

GeneratorSpec make_bistable(const ParameterMap& given) {
    if (!given.empty()) throw InputError("bistable takes no parameters");
    return GeneratorSpec::builtin(
        "bistable", {}, 2,
        [](std::span<const double> m, Matrix& q) {
            const double x = m[0];
            q(0, 1) = 29.0 / 3.0 * x * x - 16.0 * x + 22.0 / 3.0;
            q(1, 0) = x * x + x + 1.0;
        },
        false);
}

}  // namespace

GeneratorSpec corpus(const std::string& name, const ParameterMap& parameters) {
    if (name == "consumer") return make_consumer(parameters);
    if (name == "oscillator") return make_oscillator(parameters);
    if (name == "bistable") return make_bistable(parameters);
    throw InputError("unknown corpus generator '" + name + "'");
}

std::vector<std::string> corpus_names() { return {"bistable", "consumer", "oscillator"}; }

}  // namespace nlmc
