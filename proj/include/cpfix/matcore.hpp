#pragma once

// Dense complex matrices, Hermitian matrices and their spectral calculus.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpfix {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operands of incompatible sizes.
class DimensionError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Raised when a matrix function is evaluated outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical tolerances. Every threshold is applied relative to
/// max(1, norm of the input it is compared against).
struct ToleranceConfig {
    double eqTol = 1e-9;
    double psdTol = 1e-8;
    double clusterGap = 1e-8;
    double nullTol = 1e-10;

    void validate() const {
        if (!(eqTol > 0 && psdTol > 0 && clusterGap > 0 && nullTol > 0))
            throw PreconditionError("tolerances must be strictly positive");
        if (!(clusterGap < 1))
            throw PreconditionError("clusterGap must be < 1");
    }
};

inline double scale_of(double norm) { return std::max(1.0, norm); }

inline bool is_finite(const CMatrix& a) {
    return a.allFinite();
}

inline void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw PreconditionError(std::string(what) + ": matrix must be square and non-empty");
    if (!is_finite(a))
        throw PreconditionError(std::string(what) + ": matrix has non-finite entries");
}

/// Operator (spectral) norm.
inline double op_norm(const CMatrix& a) {
    if (a.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

inline double hs_inner_real(const CMatrix& a, const CMatrix& b) {
    return (a.adjoint() * b).trace().real();
}

inline Complex hs_inner(const CMatrix& a, const CMatrix& b) {
    return (a.adjoint() * b).trace();
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) {
    return a * b - b * a;
}

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

/// Matrix unit e_ij (zero-based).
inline CMatrix matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

/// Column-stacking vectorization: vec(a)(i + j*d) = a(i, j).
inline CVector vec(const CMatrix& a) {
    return Eigen::Map<const CVector>(a.data(), a.size());
}

inline CMatrix unvec(const CVector& v, Eigen::Index d) {
    return Eigen::Map<const CMatrix>(v.data(), d, d);
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// A Hermitian matrix. Inputs are checked against hermTol relative to their
/// norm and then stored exactly symmetrized.
class HermMatrix {
public:
    static constexpr double kDefaultHermTol = 1e-9;

    HermMatrix() = default;

    explicit HermMatrix(const CMatrix& a, double hermTol = kDefaultHermTol) {
        require_square(a, "HermMatrix");
        const double skew = op_norm(a - a.adjoint());
        if (skew > hermTol * scale_of(op_norm(a))) {
            std::ostringstream os;
            os << "HermMatrix: input is not Hermitian (||A - A*|| = " << skew << ")";
            throw PreconditionError(os.str());
        }
        m_ = 0.5 * (a + a.adjoint());
    }

    /// Symmetrizes without checking; for values Hermitian by construction.
    static HermMatrix symmetrize(const CMatrix& a) {
        require_square(a, "HermMatrix::symmetrize");
        HermMatrix h;
        h.m_ = 0.5 * (a + a.adjoint());
        return h;
    }

    static HermMatrix diagonal(const std::vector<double>& values) {
        CMatrix a = CMatrix::Zero(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            a(i, i) = values[i];
        return HermMatrix(a);
    }

    static HermMatrix identity(Eigen::Index d) { return HermMatrix(CMatrix::Identity(d, d)); }

    const CMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    operator const CMatrix&() const { return m_; }

    HermMatrix operator+(const HermMatrix& o) const { return symmetrize(m_ + o.m_); }
    HermMatrix operator-(const HermMatrix& o) const { return symmetrize(m_ - o.m_); }
    HermMatrix operator*(double s) const { return symmetrize(s * m_); }

private:
    CMatrix m_;
};

struct SpectralDecomposition {
    std::vector<double> eigenvalues;  // strictly decreasing
    std::vector<HermMatrix> projections;
    std::vector<int> multiplicities;

    std::size_t size() const { return eigenvalues.size(); }

    CMatrix reconstruct() const {
        CMatrix out = CMatrix::Zero(projections.front().dim(), projections.front().dim());
        for (std::size_t n = 0; n < size(); ++n)
            out += eigenvalues[n] * projections[n].matrix();
        return out;
    }
};

namespace detail {

struct RawEigen {
    Eigen::VectorXd values;  // ascending
    CMatrix vectors;
};

inline RawEigen raw_eig(const HermMatrix& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
    if (solver.info() != Eigen::Success)
        throw NumericalError("herm_eig: eigen-iteration did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace detail

/// Spectral norm of a Hermitian matrix, max |lambda|.
inline double herm_norm(const HermMatrix& a) {
    const auto raw = detail::raw_eig(a);
    return std::max(std::abs(raw.values(0)), std::abs(raw.values(raw.values.size() - 1)));
}

/// Eigendecomposition with eigenvalues merged into a single spectral
/// projection when consecutive ones lie within clusterGap * max(1, ||A||).
inline SpectralDecomposition herm_eig(const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    const auto raw = detail::raw_eig(a);
    const Eigen::Index d = a.dim();
    const double norm = std::max(std::abs(raw.values(0)), std::abs(raw.values(d - 1)));
    const double gap = cfg.clusterGap * scale_of(norm);

    SpectralDecomposition out;
    Eigen::Index hi = d - 1;
    while (hi >= 0) {
        Eigen::Index lo = hi;
        while (lo > 0 && raw.values(hi) - raw.values(lo - 1) <= gap)
            --lo;
        // mean of the cluster keeps the reconstruction error at the rounding level
        const double lambda = raw.values.segment(lo, hi - lo + 1).mean();
        const auto block = raw.vectors.middleCols(lo, hi - lo + 1);
        out.eigenvalues.push_back(lambda);
        out.projections.push_back(HermMatrix::symmetrize(block * block.adjoint()));
        out.multiplicities.push_back(static_cast<int>(hi - lo + 1));
        hi = lo - 1;
    }
    return out;
}

/// A real scalar function with an open domain (lo, hi).
struct ScalarFunction {
    std::function<double(double)> fn;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::string name = "f";

    bool contains(double t) const { return t > lo && t < hi; }
};

/// Spectral evaluation: sum_n f(lambda_n) p_n.
inline HermMatrix mat_func(const ScalarFunction& f, const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    const auto spec = herm_eig(a, cfg);
    CMatrix out = CMatrix::Zero(a.dim(), a.dim());
    for (std::size_t n = 0; n < spec.size(); ++n) {
        const double t = spec.eigenvalues[n];
        if (!f.contains(t)) {
            std::ostringstream os;
            os.precision(17);
            os << "mat_func: eigenvalue " << t << " lies outside the domain (" << f.lo << ", " << f.hi
               << ") of " << f.name;
            throw DomainError(os.str());
        }
        out += f.fn(t) * spec.projections[n].matrix();
    }
    return HermMatrix::symmetrize(out);
}

inline HermMatrix mat_func(const std::function<double(double)>& f, const HermMatrix& a,
                           const ToleranceConfig& cfg = {}) {
    return mat_func(ScalarFunction{f}, a, cfg);
}

inline double psd_min_eig(const HermMatrix& a) {
    return detail::raw_eig(a).values(0);
}

inline double psd_min_eig(const CMatrix& a) {
    return psd_min_eig(HermMatrix::symmetrize(a));
}

/// Positive square root; negative eigenvalues down to -psdTol are clamped.
inline HermMatrix psd_sqrt(const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    const auto raw = detail::raw_eig(a);
    const double floor = -cfg.psdTol * scale_of(herm_norm(a));
    if (raw.values(0) < floor)
        throw PreconditionError("psd_sqrt: matrix is not positive semidefinite");
    const Eigen::VectorXd roots = raw.values.cwiseMax(0.0).cwiseSqrt();
    return HermMatrix::symmetrize(raw.vectors * roots.cast<Complex>().asDiagonal() * raw.vectors.adjoint());
}

/// Inverse square root of a positive definite matrix.
inline HermMatrix psd_inv_sqrt(const HermMatrix& a) {
    const auto raw = detail::raw_eig(a);
    const double top = raw.values(raw.values.size() - 1);
    if (!(raw.values(0) > 1e-14 * scale_of(top)))
        throw PreconditionError("psd_inv_sqrt: matrix is singular or indefinite");
    const Eigen::VectorXd inv = raw.values.cwiseSqrt().cwiseInverse();
    return HermMatrix::symmetrize(raw.vectors * inv.cast<Complex>().asDiagonal() * raw.vectors.adjoint());
}

struct NullspaceResult {
    std::vector<CMatrix> basis;  // Hilbert-Schmidt orthonormal
    double sigmaMax = 0.0;
    double threshold = 0.0;
    bool rankAmbiguous = false;
    std::vector<double> residuals;  // ||L(b)|| per basis element
};

/// Kernel of the stacked linear system { L_k(a) = 0 } on d x d matrices.
/// Each row block maps vec(a) (column-stacked) to some vector; all must have
/// d*d columns. An empty system yields the full matrix space.
inline NullspaceResult nullspace_basis(const std::vector<CMatrix>& rows, Eigen::Index d,
                                       const ToleranceConfig& cfg = {}) {
    const Eigen::Index n = d * d;
    NullspaceResult out;
    if (rows.empty()) {
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index i = 0; i < d; ++i)
                out.basis.push_back(matrix_unit(d, i, j));
        out.residuals.assign(out.basis.size(), 0.0);
        return out;
    }

    Eigen::Index total = 0;
    for (const auto& r : rows) {
        if (r.cols() != n)
            throw DimensionError("nullspace_basis: row block has wrong column count");
        total += r.rows();
    }
    CMatrix stacked(total, n);
    Eigen::Index at = 0;
    for (const auto& r : rows) {
        stacked.middleRows(at, r.rows()) = r;
        at += r.rows();
    }

    // Reduce tall systems to a square triangular factor first.
    CMatrix system = stacked;
    if (total > n) {
        Eigen::HouseholderQR<CMatrix> qr(stacked);
        system = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    }

    Eigen::JacobiSVD<CMatrix> svd(system, Eigen::ComputeFullV);
    const Eigen::VectorXd sigma = [&] {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
        s.head(svd.singularValues().size()) = svd.singularValues();
        return s;
    }();
    out.sigmaMax = sigma(0);
    out.threshold = cfg.nullTol * scale_of(out.sigmaMax);

    for (Eigen::Index k = 0; k < n; ++k) {
        const double s = sigma(k);
        if (s > out.threshold / 10 && s < out.threshold * 10)
            out.rankAmbiguous = true;
        if (s <= out.threshold) {
            const CVector v = svd.matrixV().col(k);
            out.basis.push_back(unvec(v / v.norm(), d));
            out.residuals.push_back((stacked * v).norm());
        }
    }
    return out;
}

/// Hilbert-Schmidt orthonormal basis of the real span of Hermitian matrices.
/// Directions with singular value below relTol * sigma_max are dropped.
inline std::vector<HermMatrix> hermitian_span_basis(const std::vector<CMatrix>& hermitians, double relTol = 1e-8) {
    if (hermitians.empty())
        return {};
    const Eigen::Index d = hermitians.front().rows();
    const Eigen::Index n = d * d;
    Eigen::MatrixXd real(2 * n, static_cast<Eigen::Index>(hermitians.size()));
    for (std::size_t k = 0; k < hermitians.size(); ++k) {
        const CVector v = vec(hermitians[k]);
        real.col(k).head(n) = v.real();
        real.col(k).tail(n) = v.imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(real, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    std::vector<HermMatrix> out;
    if (s.size() == 0 || s(0) == 0.0)
        return out;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) <= relTol * s(0))
            break;
        CVector v(n);
        v.real() = svd.matrixU().col(k).head(n);
        v.imag() = svd.matrixU().col(k).tail(n);
        out.push_back(HermMatrix::symmetrize(unvec(v, d)));
    }
    return out;
}

/// Residual of projecting x onto the span of an orthonormal basis.
inline double span_residual(const CMatrix& x, const std::vector<CMatrix>& orthonormal) {
    CMatrix r = x;
    for (const auto& b : orthonormal)
        r -= hs_inner(b, x) * b;
    return r.norm();
}

}  // namespace cpfix
