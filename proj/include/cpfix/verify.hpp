#pragma once

// Executable versions of the fixed-point theorem, its corollary and the
// eigenprojection peeling argument. Each step of the argument is computed
// as a residual and compared against a tolerance; hypothesis failures are
// reported, not thrown.

#include "cpfix/algebra.hpp"
#include "cpfix/channel.hpp"
#include "cpfix/jensen.hpp"
#include "cpfix/matcore.hpp"
#include "cpfix/random.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace cpfix {

struct TheoremOptions {
    int powerDepth = 8;
    /// Tolerance for projection and commutator residuals, relative to max(1, ||a||).
    double conclusionTol = 1e-7;
};

struct TheoremHypotheses {
    bool unital = false;
    bool subunitalDual = false;
    bool invariance = false;  // Phi(M) in M
    bool aInAlgebra = false;
    bool aPositive = false;
    bool superFixed = false;  // Phi(a) >= a

    bool all() const { return unital && subunitalDual && invariance && aInAlgebra && aPositive && superFixed; }
};

struct EpsStep {
    double eps = 0.0;
    double fixednessResidual = 0.0;  // ||Phi(f_eps(a)) - f_eps(a)||
    std::optional<double> jensenMinEig;
    std::optional<double> dominationMinEig;
};

struct ProjectionStep {
    double eigenvalue = 0.0;
    int multiplicity = 0;
    double fixednessResidual = 0.0;    // ||Phi(p) - p||
    double compressionResidual = 0.0;  // ||(1-p) Phi(p) (1-p)||
    double offDiagonalResidual = 0.0;  // max_t max(||p x_t (1-p)||, ||(1-p) x_t p||)
};

struct TheoremReport {
    std::string subject = "theorem";
    TheoremHypotheses hypotheses;
    double minEigPhiMinusA = 0.0;
    std::optional<double> traceGap;       // tau(a) - tau(Phi(a))
    std::optional<double> traceChainResidual;
    double fixednessResidual = 0.0;
    std::vector<EpsStep> epsSteps;
    std::vector<double> powerResiduals;   // n = 1..N
    std::vector<ProjectionStep> projections;
    double commutatorResidual = 0.0;      // max_t ||[a, x_t]||
    std::optional<IneqResidual> kadisonSchwarz;
    std::vector<std::string> failures;
    bool verdict = false;
};

struct TraceInequality {
    double gap = 0.0;            // tau(a) - tau(Phi(a))
    double tauA = 0.0;
    double tauPhiA = 0.0;
    double tauSandwich = 0.0;    // tau(a^{1/2} e a^{1/2})
    double chainResidual = 0.0;  // |tau(Phi(a)) - tau(a^{1/2} e a^{1/2})|
    bool gapHolds = false;
    bool chainHolds = false;
};

namespace detail {

inline bool is_psd(const HermMatrix& a, const ToleranceConfig& cfg) {
    return psd_min_eig(a) >= -cfg.psdTol * scale_of(herm_norm(a));
}

}  // namespace detail

/// tau(a) - tau(Phi(a)), together with the independent evaluation of
/// tau(a^{1/2} e a^{1/2}) that the trace inequality passes through.
inline TraceInequality trace_inequality_check(const KrausFamily& k, const BlockAlgebra& m, const HermMatrix& a,
                                              const ToleranceConfig& cfg = {}) {
    require_dim(k, a, "trace_inequality_check");
    if (!detail::is_psd(a, cfg))
        throw PreconditionError("trace_inequality_check: a is not positive semidefinite");
    const auto norm = normalization_report(k, cfg);
    if (!norm.isSubunitalDual)
        throw PreconditionError("trace_inequality_check: e = sum mu x x^* is not dominated by 1");
    if (!m.contains(a, cfg))
        throw PreconditionError("trace_inequality_check: a is not in the algebra");
    const CMatrix phiA = apply_map(k, a.matrix());
    if (!m.contains(phiA, cfg))
        throw PreconditionError("trace_inequality_check: Phi(a) is not in the algebra");

    TraceInequality r;
    r.tauA = trace_tau(m, a.matrix(), cfg);
    r.tauPhiA = trace_tau(m, phiA, cfg);
    const CMatrix root = psd_sqrt(a, cfg).matrix();
    r.tauSandwich = m.compressedTrace(root * norm.rowSum.matrix() * root);
    r.gap = r.tauA - r.tauPhiA;
    r.chainResidual = std::abs(r.tauPhiA - r.tauSandwich);
    const double scale = scale_of(std::abs(r.tauA));
    r.gapHolds = r.gap >= -cfg.eqTol * scale;
    r.chainHolds = r.chainResidual <= cfg.eqTol * scale;
    return r;
}

struct PowerCheck {
    std::vector<double> residuals;  // ||Phi(a^n) - a^n||, n = 1..N
    std::vector<double> bounds;     // eqTol * max(1, ||a||^n)
    bool ok = true;
};

inline PowerCheck power_fixed_check(const KrausFamily& k, const HermMatrix& a, int depth,
                                    const ToleranceConfig& cfg = {}) {
    require_dim(k, a, "power_fixed_check");
    const auto norm = normalization_report(k, cfg);
    if (!norm.isUnital || !norm.isSubunitalDual)
        throw PreconditionError("power_fixed_check: channel must be unital with e <= 1");
    const double anorm = herm_norm(a);
    if (op_norm(apply_map(k, a.matrix()) - a.matrix()) > cfg.eqTol * scale_of(anorm))
        throw PreconditionError("power_fixed_check: a is not a fixed point");
    PowerCheck out;
    CMatrix power = identity(a.dim());
    for (int n = 1; n <= depth; ++n) {
        power = power * a.matrix();
        const double r = op_norm(apply_map(k, power) - power);
        const double bound = cfg.eqTol * scale_of(std::pow(anorm, n));
        out.residuals.push_back(r);
        out.bounds.push_back(bound);
        out.ok = out.ok && r <= bound;
    }
    return out;
}

/// Runs the proof of the fixed-point theorem on a concrete instance.
inline TheoremReport theorem_verify(const KrausFamily& k, const BlockAlgebra& m, const HermMatrix& a,
                                    const ToleranceConfig& cfg = {}, const TheoremOptions& opt = {}) {
    require_dim(k, a, "theorem_verify");
    if (m.ambientDim() != k.dim())
        throw DimensionError("theorem_verify: algebra and channel dimensions differ");

    TheoremReport r;
    const double anorm = herm_norm(a);
    const double scale = scale_of(anorm);
    const CMatrix& am = a.matrix();
    const CMatrix phiA = apply_map(k, am);
    const auto ops = k.operators();
    auto fail = [&r](std::string what) { r.failures.push_back(std::move(what)); };

    // (1) hypotheses
    const auto norm = normalization_report(k, cfg);
    r.hypotheses.unital = norm.isUnital;
    r.hypotheses.subunitalDual = norm.isSubunitalDual;
    r.hypotheses.invariance = invariance_check(k, m, cfg);
    r.hypotheses.aInAlgebra = m.contains(am, cfg);
    r.hypotheses.aPositive = detail::is_psd(a, cfg);
    r.minEigPhiMinusA = psd_min_eig(HermMatrix::symmetrize(phiA - am));
    r.hypotheses.superFixed = r.minEigPhiMinusA >= -cfg.psdTol * scale;
    if (!r.hypotheses.unital) fail("hypothesis: Phi is not unital");
    if (!r.hypotheses.subunitalDual) fail("hypothesis: e is not dominated by 1");
    if (!r.hypotheses.invariance) fail("hypothesis: Phi does not map M into M");
    if (!r.hypotheses.aInAlgebra) fail("hypothesis: a is not in M");
    if (!r.hypotheses.aPositive) fail("hypothesis: a is not positive");
    if (!r.hypotheses.superFixed) fail("hypothesis: Phi(a) - a is not positive");

    // (2) trace gap
    if (r.hypotheses.aPositive && r.hypotheses.subunitalDual && r.hypotheses.aInAlgebra && m.contains(phiA, cfg)) {
        const auto ti = trace_inequality_check(k, m, a, cfg);
        r.traceGap = ti.gap;
        r.traceChainResidual = ti.chainResidual;
        if (!ti.gapHolds) fail("trace: tau(Phi(a)) exceeds tau(a)");
    }

    // (3) fixedness
    r.fixednessResidual = op_norm(phiA - am);
    if (r.fixednessResidual > cfg.eqTol * scale) fail("conclusion: Phi(a) != a");

    // (4) f_eps(a) is fixed for eps on either side of zero
    const bool contractive = psd_min_eig(HermMatrix::identity(k.dim()) - norm.columnSum) >= -cfg.psdTol;
    for (const double sign : {1.0, -1.0}) {
        EpsStep step;
        step.eps = sign * 0.5 / scale;
        const EpsFunction f(step.eps);
        const HermMatrix fa = f_eps_eval(f, a, cfg);
        step.fixednessResidual = op_norm(apply_map(k, fa.matrix()) - fa.matrix());
        if (contractive)
            step.jensenMinEig = jensen_residual(k, f, a, cfg).minEig;
        if (r.hypotheses.aPositive)
            step.dominationMinEig = lambda_domination_check(f, a, cfg).minEig;
        if (step.fixednessResidual > cfg.eqTol * scale_of(herm_norm(fa)))
            fail("conclusion: Phi(f_eps(a)) != f_eps(a) for eps = " + std::to_string(step.eps));
        r.epsSteps.push_back(step);
    }

    // (5) powers
    CMatrix power = identity(a.dim());
    for (int n = 1; n <= opt.powerDepth; ++n) {
        power = power * am;
        const double res = op_norm(apply_map(k, power) - power);
        r.powerResiduals.push_back(res);
        if (res > cfg.eqTol * scale_of(std::pow(anorm, n)))
            fail("conclusion: Phi(a^" + std::to_string(n) + ") != a^" + std::to_string(n));
    }

    // (6) spectral projections
    const auto spec = spectral_projections(a, cfg);
    const CMatrix id = identity(a.dim());
    double xscale = 1.0;
    for (const auto& x : ops)
        xscale = std::max(xscale, op_norm(x));
    for (std::size_t n = 0; n < spec.size(); ++n) {
        const CMatrix& p = spec.projections[n].matrix();
        const CMatrix q = id - p;
        ProjectionStep step;
        step.eigenvalue = spec.eigenvalues[n];
        step.multiplicity = spec.multiplicities[n];
        const CMatrix phiP = apply_map(k, p);
        step.fixednessResidual = op_norm(phiP - p);
        step.compressionResidual = op_norm(q * phiP * q);
        for (const auto& x : ops)
            step.offDiagonalResidual = std::max({step.offDiagonalResidual, op_norm(p * x * q), op_norm(q * x * p)});
        if (step.fixednessResidual > opt.conclusionTol)
            fail("conclusion: spectral projection " + std::to_string(n) + " is not fixed");
        if (step.offDiagonalResidual > opt.conclusionTol * xscale)
            fail("conclusion: x_t does not preserve spectral subspace " + std::to_string(n));
        r.projections.push_back(step);
    }

    // (7) commutators
    r.commutatorResidual = max_commutator(am, ops);
    if (r.commutatorResidual > opt.conclusionTol * scale) fail("conclusion: a does not commute with the family");

    r.verdict = r.failures.empty();
    return r;
}

/// Fixed points a >= 0 commute with the family: Kadison-Schwarz makes a^2
/// super-fixed, the theorem then applies to a^2, and a shares its
/// spectral projections with a^2.
inline TheoremReport corollary_verify(const KrausFamily& k, const BlockAlgebra& m, const HermMatrix& a,
                                      const ToleranceConfig& cfg = {}, const TheoremOptions& opt = {}) {
    require_dim(k, a, "corollary_verify");
    const double scale = scale_of(herm_norm(a));
    if (!detail::is_psd(a, cfg))
        throw PreconditionError("corollary_verify: a must be positive semidefinite");
    if (op_norm(apply_map(k, a.matrix()) - a.matrix()) > cfg.eqTol * scale)
        throw PreconditionError("corollary_verify: a is not a fixed point of Phi");

    const HermMatrix square = HermMatrix::symmetrize(a.matrix() * a.matrix());
    TheoremReport r = theorem_verify(k, m, square, cfg, opt);
    r.subject = "corollary";
    if (normalization_report(k, cfg).isUnital) {
        r.kadisonSchwarz = kadison_schwarz_residual(k, a, cfg);
        if (!r.kadisonSchwarz->verdict) r.failures.push_back("corollary: Phi(a)^2 <= Phi(a^2) fails");
    }
    r.commutatorResidual = max_commutator(a.matrix(), k.operators());
    if (r.commutatorResidual > opt.conclusionTol * scale)
        r.failures.push_back("corollary: a does not commute with the family");
    r.verdict = r.failures.empty();
    return r;
}

struct PeelStep {
    double lambda = 0.0;
    HermMatrix projection;
    int multiplicity = 0;
    double commutatorResidual = 0.0;  // max_t ||[x_t, p]||
    double fixednessResidual = 0.0;   // ||Phi(p) - p||
    double superFixedMinEig = 0.0;    // min eig of Phi(a_n) - a_n before the step
};

struct PeelTrace {
    std::vector<PeelStep> steps;
    double reconstructionResidual = 0.0;
    std::optional<int> failedStep;
    std::string failure;
    bool verdict = false;
};

/// Strips the top eigenvalue cluster off a one step at a time, checking that
/// each eigenprojection commutes with the self-adjoint family.
inline PeelTrace spectral_peel(const KrausFamily& k, const HermMatrix& a, const ToleranceConfig& cfg = {}) {
    require_dim(k, a, "spectral_peel");
    const auto norm = normalization_report(k, cfg);
    if (!norm.selfAdjointFamily)
        throw PreconditionError("spectral_peel: Kraus operators must be self-adjoint");
    if (!norm.isUnital)
        throw PreconditionError("spectral_peel: channel is not unital");
    const double anorm = herm_norm(a);
    const double scale = scale_of(anorm);
    if (psd_min_eig(a) < -cfg.psdTol * scale)
        throw PreconditionError("spectral_peel: a is not positive semidefinite");
    const double gap0 = psd_min_eig(HermMatrix::symmetrize(apply_map(k, a.matrix()) - a.matrix()));
    if (gap0 < -cfg.psdTol * scale)
        throw PreconditionError("spectral_peel: Phi(a) - a is not positive semidefinite (min eigenvalue " +
                                std::to_string(gap0) + ")");

    PeelTrace trace;
    const auto ops = k.operators();
    CMatrix current = a.matrix();
    CMatrix rebuilt = CMatrix::Zero(a.dim(), a.dim());
    auto stop = [&](int step, std::string why) {
        if (!trace.failedStep) {
            trace.failedStep = step;
            trace.failure = std::move(why);
        }
    };

    for (Eigen::Index guard = 0; guard <= a.dim(); ++guard) {
        const HermMatrix cur = HermMatrix::symmetrize(current);
        if (herm_norm(cur) <= cfg.eqTol * scale)
            break;
        const int index = static_cast<int>(trace.steps.size());
        PeelStep step;
        step.superFixedMinEig = psd_min_eig(HermMatrix::symmetrize(apply_map(k, current) - current));
        const auto spec = herm_eig(cur, cfg);
        step.lambda = spec.eigenvalues.front();
        step.projection = spec.projections.front();
        step.multiplicity = spec.multiplicities.front();
        const CMatrix& p = step.projection.matrix();
        step.commutatorResidual = max_commutator(p, ops);
        step.fixednessResidual = op_norm(apply_map(k, p) - p);

        if (step.superFixedMinEig < -cfg.psdTol * scale)
            stop(index, "Phi(a_n) >= a_n lost at step " + std::to_string(index));
        if (step.lambda < -cfg.psdTol * scale)
            stop(index, "negative eigenvalue at step " + std::to_string(index));
        if (step.commutatorResidual > cfg.eqTol * scale)
            stop(index, "projection does not commute with the family at step " + std::to_string(index));

        rebuilt += step.lambda * p;
        current -= step.lambda * p;
        trace.steps.push_back(std::move(step));
    }
    for (std::size_t i = 1; i < trace.steps.size(); ++i)
        if (!(trace.steps[i].lambda < trace.steps[i - 1].lambda))
            stop(static_cast<int>(i), "eigenvalues are not strictly decreasing");

    trace.reconstructionResidual = op_norm(a.matrix() - rebuilt);
    if (trace.reconstructionResidual > cfg.eqTol * scale)
        stop(static_cast<int>(trace.steps.size()), "peeled projections do not reconstruct a");
    trace.verdict = !trace.failedStep.has_value();
    return trace;
}

enum class ExploreMode { UnitalOnly, SubunitalOnly };
enum class ExploreSource { Generic, Bistochastic };

struct TrialConfig {
    int dim = 2;
    int trials = 1;
    std::uint64_t seed = 0;
    ExploreMode mode = ExploreMode::UnitalOnly;
    ExploreSource source = ExploreSource::Generic;

    void validate() const {
        if (dim < 1) throw PreconditionError("TrialConfig: dim must be positive");
        if (trials < 1) throw PreconditionError("TrialConfig: trials must be at least 1");
    }
};

struct TrialRecord {
    int index = 0;
    int krausTerms = 0;
    std::vector<int> blocks;
    int fixedDim = 0;
    int commutantDim = 0;
    bool traceOnDiagonal = false;  // e = 1 on this instance
    double maxCommutatorResidual = 0.0;
    bool violation = false;
    KrausFamily instance;
};

struct ExplorationReport {
    TrialConfig config;
    std::vector<TrialRecord> trials;
    int violations = 0;
    double maxCommutatorResidual = 0.0;
    double threshold = 0.0;
    bool verdict = true;  // no violation found
};

namespace detail {

inline KrausFamily explore_instance(const TrialConfig& cfg, Rng& rng, std::vector<int>& blocks, int& terms) {
    const Eigen::Index d = cfg.dim;
    terms = std::uniform_int_distribution<int>(2, 3)(rng);
    if (cfg.source == ExploreSource::Bistochastic) {
        blocks = {cfg.dim};
        return random_bistochastic(d, static_cast<std::size_t>(terms), rng());
    }
    // Random split into one or two diagonal blocks so that fixed spaces are
    // not always trivial.
    blocks = {cfg.dim};
    if (cfg.dim >= 2 && std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
        const int first = std::uniform_int_distribution<int>(1, cfg.dim - 1)(rng);
        blocks = {first, cfg.dim - first};
    }
    std::vector<CMatrix> ops(static_cast<std::size_t>(terms), CMatrix::Zero(d, d));
    int offset = 0;
    for (const int b : blocks) {
        const auto raw = random_ginibre_family(b, ops.size(), rng);
        const auto part = cfg.mode == ExploreMode::UnitalOnly ? column_normalize(raw).operators() : raw;
        for (std::size_t t = 0; t < ops.size(); ++t)
            ops[t].block(offset, offset, b, b) = part[t];
        offset += b;
    }
    if (cfg.mode == ExploreMode::SubunitalOnly)
        return row_scale(ops);
    return KrausFamily::from_operators(ops);
}

inline TrialRecord run_trial(const TrialConfig& cfg, int index, const ToleranceConfig& tol) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(index));
    TrialRecord rec;
    rec.index = index;
    rec.instance = explore_instance(cfg, rng, rec.blocks, rec.krausTerms);
    const auto fix = fixed_space_basis(rec.instance, tol);
    const auto comm = commutant_basis(rec.instance, tol);
    rec.fixedDim = fix.dimension;
    rec.commutantDim = comm.dimension;
    rec.traceOnDiagonal = normalization_report(rec.instance, tol).isTracePreserving;
    const auto ops = rec.instance.operators();
    for (const auto& b : fix.hermBasis)
        rec.maxCommutatorResidual = std::max(rec.maxCommutatorResidual, max_commutator(b.matrix(), ops));
    rec.violation = rec.maxCommutatorResidual > 100 * tol.eqTol;
    return rec;
}

}  // namespace detail

/// Searches random families satisfying only one of the two normalization
/// conditions for fixed points outside the commutant. Trials are seeded
/// from (seed, trial index), so the report does not depend on threads.
inline ExplorationReport hypothesis_explorer(const TrialConfig& cfg, const ToleranceConfig& tol = {},
                                             unsigned threads = 1) {
    cfg.validate();
    ExplorationReport report;
    report.config = cfg;
    report.threshold = 100 * tol.eqTol;
    report.trials.resize(static_cast<std::size_t>(cfg.trials));

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials)));
    auto work = [&](unsigned worker) {
        for (int i = static_cast<int>(worker); i < cfg.trials; i += static_cast<int>(threads))
            report.trials[static_cast<std::size_t>(i)] = detail::run_trial(cfg, i, tol);
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(work, w);
        for (auto& t : pool)
            t.join();
    }

    for (const auto& t : report.trials) {
        report.violations += t.violation ? 1 : 0;
        report.maxCommutatorResidual = std::max(report.maxCommutatorResidual, t.maxCommutatorResidual);
    }
    report.verdict = report.violations == 0;
    return report;
}

}  // namespace cpfix
