#pragma once

// Commutants and block-diagonal subalgebras with weighted traces.

#include "cpfix/channel.hpp"
#include "cpfix/matcore.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace cpfix {

struct OperatorBasis {
    int dimension = 0;
    std::vector<CMatrix> elements;  // Hilbert-Schmidt orthonormal
    bool rankAmbiguous = false;
};

/// Basis of {a : a x = x a for every x in family}.
inline OperatorBasis commutant_basis(const std::vector<CMatrix>& family, Eigen::Index d,
                                     const ToleranceConfig& cfg = {}) {
    std::vector<CMatrix> rows;
    const CMatrix id = identity(d);
    for (const auto& x : family) {
        if (x.rows() != d || x.cols() != d)
            throw DimensionError("commutant_basis: operator dimensions differ");
        // vec(x a - a x) = (1 kron x - x^T kron 1) vec(a)
        rows.push_back(kron(id, x) - kron(x.transpose(), id));
    }
    const NullspaceResult kernel = nullspace_basis(rows, d, cfg);
    return {static_cast<int>(kernel.basis.size()), kernel.basis, kernel.rankAmbiguous};
}

inline OperatorBasis commutant_basis(const std::vector<CMatrix>& family, const ToleranceConfig& cfg = {}) {
    if (family.empty())
        throw PreconditionError("commutant_basis: empty family needs an explicit dimension");
    return commutant_basis(family, family.front().rows(), cfg);
}

inline OperatorBasis commutant_basis(const KrausFamily& k, const ToleranceConfig& cfg = {}) {
    return commutant_basis(k.operators(), k.dim(), cfg);
}

/// Hermitian orthonormal basis spanning the same space as a *-closed basis.
inline std::vector<HermMatrix> hermitian_basis(const OperatorBasis& basis) {
    std::vector<CMatrix> candidates;
    const Complex i2(0.0, 2.0);
    for (const auto& b : basis.elements) {
        candidates.push_back(0.5 * (b + b.adjoint()));
        candidates.push_back((b - b.adjoint()) / i2);
    }
    return hermitian_span_basis(candidates);
}

inline double max_commutator(const CMatrix& a, const std::vector<CMatrix>& family) {
    double worst = 0.0;
    for (const auto& x : family)
        worst = std::max(worst, op_norm(commutator(a, x)));
    return worst;
}

/// Direct sum of full matrix blocks M = M_{d1} + ... + M_{dk} with trace
/// tau(a) = sum_i w_i Tr(a_i).
class BlockAlgebra {
public:
    BlockAlgebra() = default;

    BlockAlgebra(std::vector<int> blockDims, std::vector<double> traceWeights)
        : dims_(std::move(blockDims)), weights_(std::move(traceWeights)) {
        if (dims_.empty())
            throw PreconditionError("BlockAlgebra: at least one block is required");
        if (dims_.size() != weights_.size())
            throw PreconditionError("BlockAlgebra: blocks and weights differ in length");
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (dims_[i] <= 0)
                throw PreconditionError("BlockAlgebra: block " + std::to_string(i) + " has non-positive size");
            if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
                throw PreconditionError("BlockAlgebra: weight " + std::to_string(i) + " is not positive");
        }
    }

    /// All of M_d with the standard trace.
    static BlockAlgebra full(int d) { return BlockAlgebra({d}, {1.0}); }

    const std::vector<int>& blockDims() const { return dims_; }
    const std::vector<double>& traceWeights() const { return weights_; }
    std::size_t blocks() const { return dims_.size(); }
    int ambientDim() const { return std::accumulate(dims_.begin(), dims_.end(), 0); }

    int offset(std::size_t block) const {
        return std::accumulate(dims_.begin(), dims_.begin() + static_cast<long>(block), 0);
    }

    CMatrix blockDiagonalPart(const CMatrix& a) const {
        CMatrix out = CMatrix::Zero(a.rows(), a.cols());
        for (std::size_t i = 0; i < blocks(); ++i) {
            const int o = offset(i);
            out.block(o, o, dims_[i], dims_[i]) = a.block(o, o, dims_[i], dims_[i]);
        }
        return out;
    }

    /// Norm of the off-block part.
    double offBlockMass(const CMatrix& a) const {
        requireAmbient(a);
        return op_norm(a - blockDiagonalPart(a));
    }

    bool contains(const CMatrix& a, const ToleranceConfig& cfg = {}) const {
        return offBlockMass(a) <= cfg.eqTol * scale_of(op_norm(a));
    }

    /// Block matrix units spanning M.
    std::vector<CMatrix> matrixUnits() const {
        std::vector<CMatrix> out;
        const int d = ambientDim();
        for (std::size_t b = 0; b < blocks(); ++b) {
            const int o = offset(b);
            for (int i = 0; i < dims_[b]; ++i)
                for (int j = 0; j < dims_[b]; ++j)
                    out.push_back(matrix_unit(d, o + i, o + j));
        }
        return out;
    }

    /// sum_i w_i Tr(P_i a P_i); this is the trace on M and the compression of
    /// that trace to operators outside M.
    double compressedTrace(const CMatrix& a) const {
        requireAmbient(a);
        double tau = 0.0;
        for (std::size_t i = 0; i < blocks(); ++i) {
            const int o = offset(i);
            tau += weights_[i] * a.block(o, o, dims_[i], dims_[i]).trace().real();
        }
        return tau;
    }

private:
    void requireAmbient(const CMatrix& a) const {
        if (a.rows() != ambientDim() || a.cols() != ambientDim())
            throw DimensionError("BlockAlgebra: operand dimension does not match the algebra");
    }

    std::vector<int> dims_;
    std::vector<double> weights_;
};

/// tau(a) = sum_i w_i Tr(a_i); a must lie in M.
inline double trace_tau(const BlockAlgebra& m, const CMatrix& a, const ToleranceConfig& cfg = {}) {
    const double off = m.offBlockMass(a);
    if (off > cfg.eqTol * scale_of(op_norm(a)))
        throw PreconditionError("trace_tau: operand is not in the algebra (off-block mass " + std::to_string(off) +
                                ")");
    return m.compressedTrace(a);
}

/// True iff Phi maps every block matrix unit of M back into M.
inline bool invariance_check(const KrausFamily& k, const BlockAlgebra& m, const ToleranceConfig& cfg = {}) {
    if (m.ambientDim() != k.dim())
        throw DimensionError("invariance_check: algebra and channel dimensions differ");
    for (const auto& unit : m.matrixUnits())
        if (!m.contains(apply_map(k, unit), cfg))
            return false;
    return true;
}

/// The spectral projections of a (clustered eigenprojections).
inline SpectralDecomposition spectral_projections(const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    return herm_eig(a, cfg);
}

}  // namespace cpfix
