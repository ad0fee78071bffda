#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbma/channel.hpp"

namespace bbma {

/// s x N matrix whose column n is the steering vector toward terminal n.
struct SteeringMatrix {
    Eigen::MatrixXcd entries;

    Eigen::Index antennas() const { return entries.rows(); }
    Eigen::Index terminals() const { return entries.cols(); }
};

/// 0/1 row selecting the terminals of one symbol class.
struct ClassSelectorRow {
    std::vector<std::uint8_t> entries;

    std::size_t count_selected() const {
        std::size_t c = 0;
        for (auto e : entries) c += (e != 0);
        return c;
    }
};

struct WeightVector {
    Eigen::VectorXcd entries;
};

struct NullDiagnostics {
    double condition_number = 1.0;   // kappa2 of A^H A
    double max_in_class_error = 0.0; // max |w^H a_n - 1| over selected n
    double max_null_residual = 0.0;  // max |w^H a_k| over deselected k
};

enum class SolverKind { explicit_inverse, orthogonal_factorization };

inline const char* to_string(SolverKind k) {
    return k == SolverKind::explicit_inverse ? "explicit_inverse" : "orthogonal_factorization";
}

/// Weight computation failed numerically; carries the condition estimate of
/// A^H A so callers can record the drop instead of silently losing it.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

class ConditionCeilingExceeded : public NumericalFailure {
public:
    ConditionCeilingExceeded(double estimate, double ceiling)
        : NumericalFailure("condition number " + std::to_string(estimate) +
                               " exceeds ceiling " + std::to_string(ceiling),
                           estimate) {}
};

inline SteeringMatrix build_steering_matrix(const ArrayGeometry& array,
                                            std::span<const Terminal> terminals) {
    if (terminals.empty())
        throw std::invalid_argument("build_steering_matrix: need at least one terminal");
    const int s = array.size();
    SteeringMatrix m;
    m.entries.resize(s, static_cast<Eigen::Index>(terminals.size()));
    for (std::size_t n = 0; n < terminals.size(); ++n) {
        const auto col = steering_vector(array, terminals[n]);
        m.entries.col(static_cast<Eigen::Index>(n)) =
            Eigen::Map<const Eigen::VectorXcd>(col.data(), s);
    }
    return m;
}

/// Asserts that the class selector rows partition the N terminals: summing
/// all rows must give the all-ones row. The scheduler maintains this; weight
/// computation re-checks it at the boundary.
inline void verify_partition(std::span<const ClassSelectorRow> selectors, std::size_t n_terminals) {
    std::vector<int> sum(n_terminals, 0);
    for (const auto& row : selectors) {
        if (row.entries.size() != n_terminals)
            throw std::invalid_argument("selector row length mismatch");
        for (std::size_t i = 0; i < n_terminals; ++i) sum[i] += (row.entries[i] != 0);
    }
    for (std::size_t i = 0; i < n_terminals; ++i)
        if (sum[i] != 1)
            throw std::invalid_argument("selector rows do not partition terminal " +
                                        std::to_string(i));
}

/// kappa2 of A^H A from the singular values of A. Unlike the Gram eigenvalues
/// this stays resolvable far beyond the point where A^H A rounds to singular.
inline double condition_number_of(const SteeringMatrix& a) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a.entries);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1), smax = sv(0);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return (smax / smin) * (smax / smin);
}

struct ResponseResiduals {
    double max_in_class_error = 0.0;
    double max_null_residual = 0.0;
};

/// Worst response deviations |w^H a_n - D(n)| split by selected/deselected.
inline ResponseResiduals response_residuals(const SteeringMatrix& a,
                                            std::span<const WeightVector> weights,
                                            std::span<const ClassSelectorRow> selectors) {
    if (weights.size() != selectors.size())
        throw std::invalid_argument("response_residuals: weights/selectors size mismatch");
    ResponseResiduals r;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        const Eigen::Index n = a.entries.cols();
        if (static_cast<Eigen::Index>(selectors[c].entries.size()) != n)
            throw std::invalid_argument("response_residuals: selector length mismatch");
        const Eigen::VectorXcd resp = a.entries.adjoint() * weights[c].entries;
        for (Eigen::Index i = 0; i < n; ++i) {
            // |conj(w^H a) - t| == |w^H a - t| for real targets t
            if (selectors[c].entries[static_cast<std::size_t>(i)])
                r.max_in_class_error = std::max(r.max_in_class_error,
                                                std::abs(resp(i) - std::complex<double>{1.0}));
            else
                r.max_null_residual = std::max(r.max_null_residual, std::abs(resp(i)));
        }
    }
    return r;
}

/// Null-steering weight solver over a fixed steering matrix. Factors once and
/// serves any number of class selectors, so per-symbol weight updates only pay
/// for the cheap per-class solve (the matrix changes far slower than D does).
///
/// Both routes solve w = A (A^H A)^{-1} D^H:
///  - explicit_inverse forms (A^H A)^{-1} outright, reproducing the numerical
///    behaviour of inverting the Gram matrix directly;
///  - orthogonal_factorization uses A = QR and w = Q R^{-H} D^H without ever
///    forming the inverse.
class NullSolver {
public:
    NullSolver(const SteeringMatrix& a, SolverKind kind,
               double condition_ceiling = 1e12, bool refine = false)
        : a_(a.entries), kind_(kind), refine_(refine) {
        const Eigen::Index s = a_.rows(), n = a_.cols();
        if (n > s)
            throw std::invalid_argument("null steering needs N <= s (got N=" +
                                        std::to_string(n) + ", s=" + std::to_string(s) + ")");
        gram_ = a_.adjoint() * a_;
        // kappa2(A^H A) from the Gram eigenvalues; Hermitian PSD by construction.
        // Near rank deficiency the smallest eigenvalue rounds to <= 0, so fall
        // back to the singular values of A, which stay resolvable much further.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        condition_ = (lo <= 0.0) ? std::numeric_limits<double>::infinity() : hi / lo;
        if (std::isinf(condition_) && std::isfinite(condition_ceiling))
            condition_ = condition_number_of(a);
        if (!(condition_ <= condition_ceiling))
            throw ConditionCeilingExceeded(condition_, condition_ceiling);
        if (kind_ == SolverKind::explicit_inverse) {
            gram_inverse_ = gram_.inverse();
        } else {
            qr_.compute(a_);
        }
    }

    double condition_estimate() const { return condition_; }

    /// Weights for one class selector row.
    WeightVector weights(const ClassSelectorRow& selector) const {
        const Eigen::Index n = a_.cols();
        if (static_cast<Eigen::Index>(selector.entries.size()) != n)
            throw std::invalid_argument("selector length does not match steering matrix");
        if (selector.count_selected() == 0)
            throw std::invalid_argument("selector row selects no terminal");
        Eigen::VectorXcd d(n);
        for (Eigen::Index i = 0; i < n; ++i)
            d(i) = selector.entries[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

        Eigen::VectorXcd w;
        if (kind_ == SolverKind::explicit_inverse) {
            Eigen::VectorXcd x = gram_inverse_ * d;
            if (refine_) x += gram_inverse_ * (d - gram_ * x);
            w = a_ * x;
        } else if (!refine_) {
            w = apply_q(solve_rh(d));
        } else {
            Eigen::VectorXcd x = solve_r(solve_rh(d));
            x += solve_r(solve_rh(d - gram_ * x));
            w = a_ * x;
        }
        if (!w.allFinite())
            throw NumericalFailure("non-finite weights (condition " +
                                       std::to_string(condition_) + ")",
                                   condition_);
        return {std::move(w)};
    }

private:
    Eigen::VectorXcd solve_rh(const Eigen::VectorXcd& d) const {
        const Eigen::Index n = a_.cols();
        return qr_.matrixQR()
            .topLeftCorner(n, n)
            .triangularView<Eigen::Upper>()
            .adjoint()
            .solve(d);
    }

    Eigen::VectorXcd solve_r(const Eigen::VectorXcd& z) const {
        const Eigen::Index n = a_.cols();
        return qr_.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(z);
    }

    Eigen::VectorXcd apply_q(const Eigen::VectorXcd& z) const {
        Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(a_.rows());
        padded.head(a_.cols()) = z;
        return qr_.householderQ() * padded;
    }

    Eigen::MatrixXcd a_;
    SolverKind kind_;
    bool refine_;
    Eigen::MatrixXcd gram_;
    Eigen::MatrixXcd gram_inverse_;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr_;
    double condition_ = 1.0;
};

/// One-shot convenience wrapper around NullSolver.
inline WeightVector compute_weights(const SteeringMatrix& a, const ClassSelectorRow& selector,
                                    SolverKind kind, double condition_ceiling = 1e12) {
    return NullSolver(a, kind, condition_ceiling).weights(selector);
}

/// Beam response w^H a.
inline std::complex<double> response(const WeightVector& w, const Eigen::VectorXcd& a) {
    if (w.entries.size() != a.size())
        throw std::invalid_argument("response: dimension mismatch");
    return w.entries.dot(a);
}

inline std::complex<double> response(const WeightVector& w,
                                     const std::vector<std::complex<double>>& a) {
    return response(w, Eigen::Map<const Eigen::VectorXcd>(
                           a.data(), static_cast<Eigen::Index>(a.size())));
}

/// Conditioning and residual summary for a set of class weights.
inline NullDiagnostics diagnostics(const SteeringMatrix& a,
                                   std::span<const WeightVector> weights,
                                   std::span<const ClassSelectorRow> selectors) {
    NullDiagnostics d;
    d.condition_number = condition_number_of(a);
    const auto r = response_residuals(a, weights, selectors);
    d.max_in_class_error = r.max_in_class_error;
    d.max_null_residual = r.max_null_residual;
    return d;
}

} // namespace bbma
