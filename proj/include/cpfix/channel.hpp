#pragma once

// Weighted Kraus families and the completely positive map
//   Phi(a) = sum_t mu_t x_t^* a x_t
// they induce, together with its dual, superoperator and Choi matrix.

#include "cpfix/matcore.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cpfix {

struct KrausTerm {
    double weight = 1.0;
    CMatrix op;
};

/// Finite weighted family {(mu_t, x_t)}. The scaled operators sqrt(mu_t) x_t
/// are cached at construction.
class KrausFamily {
public:
    KrausFamily() = default;

    explicit KrausFamily(std::vector<KrausTerm> terms) : terms_(std::move(terms)) {
        if (terms_.empty())
            throw PreconditionError("KrausFamily: at least one term is required");
        dim_ = terms_.front().op.rows();
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            if (!(term.weight > 0.0) || !std::isfinite(term.weight))
                throw PreconditionError("KrausFamily: term " + std::to_string(t) + " has non-positive weight");
            require_square(term.op, "KrausFamily");
            if (term.op.rows() != dim_)
                throw DimensionError("KrausFamily: term " + std::to_string(t) + " has mismatched dimension");
            scaled_.push_back(std::sqrt(term.weight) * term.op);
        }
    }

    /// Unit-weight family from a list of operators.
    static KrausFamily from_operators(const std::vector<CMatrix>& ops) {
        std::vector<KrausTerm> terms;
        for (const auto& x : ops)
            terms.push_back({1.0, x});
        return KrausFamily(std::move(terms));
    }

    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return terms_.size(); }
    const std::vector<KrausTerm>& terms() const { return terms_; }
    const std::vector<CMatrix>& scaled() const { return scaled_; }

    std::vector<CMatrix> operators() const {
        std::vector<CMatrix> ops;
        for (const auto& t : terms_)
            ops.push_back(t.op);
        return ops;
    }

private:
    Eigen::Index dim_ = 0;
    std::vector<KrausTerm> terms_;
    std::vector<CMatrix> scaled_;
};

inline void require_dim(const KrausFamily& k, const CMatrix& a, const char* what) {
    if (a.rows() != k.dim() || a.cols() != k.dim())
        throw DimensionError(std::string(what) + ": dimension mismatch (channel " + std::to_string(k.dim()) +
                                ", operand " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
}

/// Phi(a) = sum_t mu_t x_t^* a x_t.
inline CMatrix apply_map(const KrausFamily& k, const CMatrix& a) {
    require_dim(k, a, "apply_map");
    CMatrix out = CMatrix::Zero(k.dim(), k.dim());
    for (const auto& x : k.scaled())
        out.noalias() += x.adjoint() * a * x;
    return out;
}

inline HermMatrix apply_map(const KrausFamily& k, const HermMatrix& a) {
    return HermMatrix::symmetrize(apply_map(k, a.matrix()));
}

/// Phi^dagger(a) = sum_t mu_t x_t a x_t^*, the Hilbert-Schmidt adjoint.
inline CMatrix dual_apply(const KrausFamily& k, const CMatrix& a) {
    require_dim(k, a, "dual_apply");
    CMatrix out = CMatrix::Zero(k.dim(), k.dim());
    for (const auto& x : k.scaled())
        out.noalias() += x * a * x.adjoint();
    return out;
}

inline HermMatrix dual_apply(const KrausFamily& k, const HermMatrix& a) {
    return HermMatrix::symmetrize(dual_apply(k, a.matrix()));
}

struct NormalizationReport {
    HermMatrix columnSum;  // sum mu x^* x = Phi(1)
    HermMatrix rowSum;     // e = sum mu x x^*
    bool isUnital = false;
    bool isSubunitalDual = false;
    bool isTracePreserving = false;
    bool selfAdjointFamily = false;
    bool rigidityHolds = false;
    double unitalResidual = 0.0;   // ||columnSum - 1||
    double rowResidual = 0.0;      // ||e - 1||
    double dualMinEig = 0.0;       // min eig of 1 - e
};

/// Normalization flags for the two setup conditions. When both hold, the
/// trace identity Tr e = Tr(sum mu x^* x) = d together with e <= 1 forces
/// e = 1; rigidityHolds records that this is observed to 10 * eqTol.
inline NormalizationReport normalization_report(const KrausFamily& k, const ToleranceConfig& cfg = {}) {
    const Eigen::Index d = k.dim();
    CMatrix col = CMatrix::Zero(d, d);
    CMatrix row = CMatrix::Zero(d, d);
    bool selfAdjoint = true;
    for (std::size_t t = 0; t < k.size(); ++t) {
        const CMatrix& x = k.scaled()[t];
        col.noalias() += x.adjoint() * x;
        row.noalias() += x * x.adjoint();
        const CMatrix& raw = k.terms()[t].op;
        if (op_norm(raw - raw.adjoint()) > cfg.eqTol * scale_of(op_norm(raw)))
            selfAdjoint = false;
    }

    NormalizationReport r;
    r.columnSum = HermMatrix::symmetrize(col);
    r.rowSum = HermMatrix::symmetrize(row);
    const CMatrix id = identity(d);
    r.unitalResidual = op_norm(r.columnSum.matrix() - id);
    r.rowResidual = op_norm(r.rowSum.matrix() - id);
    r.dualMinEig = psd_min_eig(HermMatrix::symmetrize(id - r.rowSum.matrix()));
    r.isUnital = r.unitalResidual <= cfg.eqTol;
    r.isSubunitalDual = r.dualMinEig >= -cfg.psdTol;
    r.isTracePreserving = r.rowResidual <= cfg.eqTol;
    r.selfAdjointFamily = selfAdjoint;
    r.rigidityHolds = !(r.isUnital && r.isSubunitalDual) || r.rowResidual <= 10 * cfg.eqTol;
    return r;
}

/// d^2 x d^2 matrix of Phi acting on column-stacked vectorizations.
struct Superoperator {
    Eigen::Index dim = 0;
    CMatrix matrix;

    Superoperator() = default;
    Superoperator(Eigen::Index d, CMatrix s) : dim(d), matrix(std::move(s)) {
        if (d <= 0 || matrix.rows() != d * d || matrix.cols() != d * d)
            throw PreconditionError("Superoperator: matrix must be d^2 x d^2");
        if (!matrix.allFinite())
            throw PreconditionError("Superoperator: non-finite entries");
    }

    CMatrix apply(const CMatrix& a) const { return unvec(matrix * vec(a), dim); }
};

/// S = sum_t mu_t (x_t^T kron x_t^*), using vec(AXB) = (B^T kron A) vec(X).
inline Superoperator superoperator_matrix(const KrausFamily& k) {
    const Eigen::Index d = k.dim();
    CMatrix s = CMatrix::Zero(d * d, d * d);
    for (const auto& x : k.scaled())
        s += kron(x.transpose(), x.adjoint());
    return Superoperator(d, std::move(s));
}

struct ChoiCheck {
    bool completelyPositive = false;
    double minEig = 0.0;
    CMatrix choi;
};

/// Choi matrix C = sum_ij Phi(e_ij) kron e_ij and its positivity verdict.
inline ChoiCheck choi_psd_check(const Superoperator& s, const ToleranceConfig& cfg = {}) {
    const Eigen::Index d = s.dim;
    CMatrix c = CMatrix::Zero(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) {
            const CMatrix image = unvec(s.matrix.col(i + j * d), d);
            c += kron(image, matrix_unit(d, i, j));
        }
    ChoiCheck out;
    const HermMatrix h = HermMatrix::symmetrize(c);
    out.minEig = psd_min_eig(h);
    out.completelyPositive = out.minEig >= -cfg.psdTol * scale_of(herm_norm(h));
    out.choi = std::move(c);
    return out;
}

struct FixedSpace {
    int dimension = 0;
    std::vector<HermMatrix> hermBasis;  // Hilbert-Schmidt orthonormal
    std::vector<double> residuals;      // ||Phi(b) - b||
    bool rankAmbiguous = false;
    bool nonUnitalWarning = false;
    bool dimensionMismatch = false;     // Hermitian basis size differs from kernel size

    std::vector<CMatrix> matrices() const {
        std::vector<CMatrix> out;
        for (const auto& b : hermBasis)
            out.push_back(b.matrix());
        return out;
    }
};

/// Fixed-point space of Phi as a Hermitian basis of ker(S - 1).
inline FixedSpace fixed_space_basis(const KrausFamily& k, const ToleranceConfig& cfg = {}) {
    const Eigen::Index d = k.dim();
    const Superoperator s = superoperator_matrix(k);
    const CMatrix system = s.matrix - CMatrix::Identity(d * d, d * d);
    const NullspaceResult kernel = nullspace_basis({system}, d, cfg);

    std::vector<CMatrix> candidates;
    const Complex i2(0.0, 2.0);
    for (const auto& b : kernel.basis) {
        candidates.push_back(0.5 * (b + b.adjoint()));
        candidates.push_back((b - b.adjoint()) / i2);
    }

    FixedSpace out;
    out.hermBasis = hermitian_span_basis(candidates);
    out.dimension = static_cast<int>(out.hermBasis.size());
    out.rankAmbiguous = kernel.rankAmbiguous;
    out.nonUnitalWarning = !normalization_report(k, cfg).isUnital;
    out.dimensionMismatch = out.hermBasis.size() != kernel.basis.size();
    for (const auto& b : out.hermBasis)
        out.residuals.push_back(op_norm(apply_map(k, b.matrix()) - b.matrix()));
    return out;
}

}  // namespace cpfix
