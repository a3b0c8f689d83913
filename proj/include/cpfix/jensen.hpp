#pragma once

// The operator convex family f_eps(t) = t^2 / (1 - eps t) and the operator
// inequalities built on it. Every inequality lhs <= rhs is reported as the
// signed minimum eigenvalue of rhs - lhs.

#include "cpfix/channel.hpp"
#include "cpfix/matcore.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cpfix {

class EpsFunction {
public:
    static constexpr double kDefaultMargin = 0.99;

    explicit EpsFunction(double eps, double marginFactor = kDefaultMargin) : eps_(eps), margin_(marginFactor) {
        if (!std::isfinite(eps))
            throw PreconditionError("EpsFunction: eps must be finite");
        if (!(marginFactor > 0.0 && marginFactor < 1.0))
            throw PreconditionError("EpsFunction: margin factor must lie in (0, 1)");
    }

    double eps() const { return eps_; }
    double marginFactor() const { return margin_; }

    /// Half-width of the domain, 1/|eps| (infinite for eps = 0).
    double radius() const {
        return eps_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(eps_);
    }

    double operator()(double t) const { return t * t / (1.0 - eps_ * t); }

    /// |eps| * norm <= marginFactor.
    bool admits(double norm) const { return std::abs(eps_) * norm <= margin_; }

    void requireAdmits(double norm, const char* what) const {
        if (!admits(norm)) {
            std::ostringstream os;
            os << what << ": |eps| * ||a|| = " << std::abs(eps_) * norm << " exceeds the pole margin " << margin_;
            throw DomainError(os.str());
        }
    }

    ScalarFunction scalar() const {
        const double r = radius();
        const double e = eps_;
        return {[e](double t) { return t * t / (1.0 - e * t); }, -r, r, "f_eps"};
    }

private:
    double eps_;
    double margin_;
};

struct IneqResidual {
    double minEig = 0.0;
    double lhsNorm = 0.0;
    double rhsNorm = 0.0;
    bool verdict = false;
};

namespace detail {

inline IneqResidual residual(const CMatrix& lhs, const CMatrix& rhs, const ToleranceConfig& cfg) {
    IneqResidual r;
    r.minEig = psd_min_eig(HermMatrix::symmetrize(rhs - lhs));
    r.lhsNorm = op_norm(lhs);
    r.rhsNorm = op_norm(rhs);
    r.verdict = r.minEig >= -cfg.psdTol * scale_of(std::max(r.lhsNorm, r.rhsNorm));
    return r;
}

}  // namespace detail

inline HermMatrix f_eps_eval(const EpsFunction& f, const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    f.requireAdmits(herm_norm(a), "f_eps_eval");
    return mat_func(f.scalar(), a, cfg);
}

/// ||f_eps(a) - sum_{n=0}^{N} eps^n a^{n+2}||.
inline double series_truncation_check(const EpsFunction& f, const HermMatrix& a, int terms,
                                      const ToleranceConfig& cfg = {}) {
    if (terms < 0)
        throw PreconditionError("series_truncation_check: N must be non-negative");
    const CMatrix exact = f_eps_eval(f, a, cfg).matrix();
    const CMatrix& x = a.matrix();
    CMatrix power = x * x;
    CMatrix partial = power;
    double coeff = 1.0;
    for (int n = 1; n <= terms; ++n) {
        power = power * x;
        coeff *= f.eps();
        partial += coeff * power;
    }
    return op_norm(exact - partial);
}

/// Geometric bound on the tail after N terms.
inline double series_tail_bound(const EpsFunction& f, double norm, int terms) {
    const double q = std::abs(f.eps()) * norm;
    return std::pow(q, terms + 1) * norm * norm / (1.0 - q);
}

/// sum mu x^* f(a) x - f(sum mu x^* a x) for a contractive family.
inline IneqResidual jensen_residual(const KrausFamily& family, const EpsFunction& f, const HermMatrix& a,
                                    const ToleranceConfig& cfg = {}) {
    require_dim(family, a, "jensen_residual");
    const auto report = normalization_report(family, cfg);
    const double contraction = psd_min_eig(HermMatrix::identity(family.dim()) - report.columnSum);
    if (contraction < -cfg.psdTol)
        throw PreconditionError("jensen_residual: family is not contractive (sum mu x^* x > 1)");
    const HermMatrix fa = f_eps_eval(f, a, cfg);
    const HermMatrix phiA = apply_map(family, a);
    // ||Phi(a)|| <= ||a|| for a contraction, so only the pole needs checking here
    const HermMatrix lhs = mat_func(f.scalar(), phiA, cfg);
    const CMatrix rhs = apply_map(family, fa.matrix());
    return detail::residual(lhs.matrix(), rhs, cfg);
}

/// (f(a) + f(b))/2 - f((a + b)/2).
inline IneqResidual midpoint_convexity_residual(const EpsFunction& f, const HermMatrix& a, const HermMatrix& b,
                                                const ToleranceConfig& cfg = {}) {
    if (a.dim() != b.dim())
        throw DimensionError("midpoint_convexity_residual: dimension mismatch");
    const HermMatrix mid = (a + b) * 0.5;
    const HermMatrix fa = f_eps_eval(f, a, cfg);
    const HermMatrix fb = f_eps_eval(f, b, cfg);
    const HermMatrix fm = f_eps_eval(f, mid, cfg);
    return detail::residual(fm.matrix(), 0.5 * (fa.matrix() + fb.matrix()), cfg);
}

/// Phi(a^2) - Phi(a)^2 for unital Phi.
inline IneqResidual kadison_schwarz_residual(const KrausFamily& k, const HermMatrix& a,
                                             const ToleranceConfig& cfg = {}) {
    require_dim(k, a, "kadison_schwarz_residual");
    if (!normalization_report(k, cfg).isUnital)
        throw PreconditionError("kadison_schwarz_residual: channel is not unital");
    const CMatrix phiA = apply_map(k, a.matrix());
    const CMatrix phiA2 = apply_map(k, CMatrix(a.matrix() * a.matrix()));
    return detail::residual(phiA * phiA, phiA2, cfg);
}

/// lambda a - f_eps(a) with lambda = ||a|| / (1 - |eps| ||a||), for a >= 0.
inline IneqResidual lambda_domination_check(const EpsFunction& f, const HermMatrix& a,
                                            const ToleranceConfig& cfg = {}) {
    const double norm = herm_norm(a);
    if (psd_min_eig(a) < -cfg.psdTol * scale_of(norm))
        throw PreconditionError("lambda_domination_check: operand is not positive semidefinite");
    f.requireAdmits(norm, "lambda_domination_check");
    const double lambda = norm / (1.0 - std::abs(f.eps()) * norm);
    const HermMatrix fa = f_eps_eval(f, a, cfg);
    return detail::residual(fa.matrix(), lambda * a.matrix(), cfg);
}

}  // namespace cpfix
