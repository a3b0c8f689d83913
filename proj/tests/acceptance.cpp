// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "cpfix_cli.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace cpfix;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// families where both normalization flags hold, collected across suites
struct RigidityLog {
    int checked = 0;
    int bistochastic = 0;
    int bistochasticFired = 0;
    double worst = 0.0;
    bool ok = true;

    void record(const KrausFamily& k, bool isBistochastic = false) {
        const auto r = normalization_report(k);
        if (isBistochastic) {
            ++bistochastic;
            bistochasticFired += r.isUnital && r.isSubunitalDual ? 1 : 0;
        }
        if (!(r.isUnital && r.isSubunitalDual))
            return;
        ++checked;
        worst = std::max(worst, r.rowResidual);
        ok = ok && r.rowResidual <= 1e-8;
    }
};

RigidityLog rigidity;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

HermMatrix positivize(const HermMatrix& h) { return h + HermMatrix::identity(h.dim()) * herm_norm(h); }

HermMatrix random_combination(const std::vector<HermMatrix>& basis, Eigen::Index d, Rng& rng) {
    std::normal_distribution<double> g;
    CMatrix a = CMatrix::Zero(d, d);
    for (const auto& b : basis)
        a += g(rng) * b.matrix();
    return HermMatrix::symmetrize(a);
}

// fixed points used by criteria 2 and 9
struct SweepPoint {
    KrausFamily family;
    HermMatrix a;
};
std::vector<SweepPoint> sweep;

Outcome ac1() {
    const auto t0 = Clock::now();
    CMatrix e11 = CMatrix::Zero(2, 2), e22 = CMatrix::Zero(2, 2);
    e11(0, 0) = 1.0;
    e22(1, 1) = 1.0;
    const KrausFamily k({{1.0, e11}, {1.0, e22}});
    const auto f = fixed_space_basis(k);
    const auto fix = f.matrices();
    const auto comm = commutant_basis(k);
    double res = std::max(span_residual(e11, fix), span_residual(e22, fix));
    double same = 0.0;
    for (const auto& b : fix)
        same = std::max(same, span_residual(b, comm.elements));
    for (const auto& b : comm.elements)
        same = std::max(same, span_residual(b, fix));
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = f.dimension == 2 && comm.dimension == 2 && res <= 1e-9 && same <= 1e-9 && secs < 1.0;
    o.detail = "dim " + std::to_string(f.dimension) + fmt(", span residual %.2e, commutant match %.2e, %.3f s", res, same, secs);
    return o;
}

Outcome ac2() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2002);
    int points = 0;
    double worst = 0.0;
    bool ok = true;
    for (Eigen::Index d = 2; d <= 4; ++d) {
        for (int i = 0; i < 100; ++i) {
            const std::size_t n = 2 + static_cast<std::size_t>(i % 2);
            const auto k = random_bistochastic(d, n, mix_seed(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(i)));
            rigidity.record(k, true);
            const auto f = fixed_space_basis(k);
            const auto ops = k.operators();
            std::vector<HermMatrix> candidates(f.hermBasis.begin(), f.hermBasis.end());
            candidates.push_back(random_combination(f.hermBasis, d, rng));
            for (const auto& h : candidates) {
                const HermMatrix a = positivize(h);
                const double bound = 1e-7 * std::max(1.0, herm_norm(a));
                const double c = max_commutator(a.matrix(), ops);
                worst = std::max(worst, c / bound);
                ok = ok && c <= bound;
                ++points;
                sweep.push_back({k, a});
            }
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = ok && secs < 60.0;
    o.detail = std::to_string(points) + " fixed points" + fmt(", worst commutator/bound %.2e, %.2f s", worst, secs);
    return o;
}

Outcome ac3() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2003);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 500; ++i) {
        const auto d = static_cast<Eigen::Index>(1 + i % 5);
        const auto k = random_contractive_family(d, 1 + static_cast<std::size_t>(i % 3), rng);
        rigidity.record(k);
        const HermMatrix a = random_hermitian(d, rng);
        const auto r = jensen_residual(k, EpsFunction(u(rng) / herm_norm(a)), a);
        worst = std::min(worst, r.minEig);
    }
    const double secs = seconds_since(t0);
    return {worst >= -1e-8 && secs < 30.0, fmt("500 instances, min eigenvalue %.2e, %.2f s", worst, secs)};
}

Outcome ac4() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2004);
    double worstGap = std::numeric_limits<double>::infinity(), worstChain = 0.0;
    for (int i = 0; i < 500; ++i) {
        const auto d = static_cast<Eigen::Index>(1 + i % 5);
        const auto k = random_subunital_dual_family(d, 1 + static_cast<std::size_t>(i % 3), rng);
        rigidity.record(k);
        const auto r = trace_inequality_check(k, BlockAlgebra::full(static_cast<int>(d)), random_psd(d, rng, 2.0));
        worstGap = std::min(worstGap, r.gap);
        worstChain = std::max(worstChain, r.chainResidual);
    }
    const double secs = seconds_since(t0);
    return {worstGap >= -1e-8 && worstChain <= 1e-9 && secs < 30.0,
            fmt("500 instances, min gap %.2e, max chain residual %.2e, %.2f s", worstGap, worstChain, secs)};
}

Outcome ac5() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2005);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 500; ++i) {
        const auto d = static_cast<Eigen::Index>(1 + i % 5);
        const auto k = random_unital_family(d, 1 + static_cast<std::size_t>(i % 3), rng);
        rigidity.record(k);
        worst = std::min(worst, kadison_schwarz_residual(k, random_hermitian(d, rng)).minEig);
    }
    const double secs = seconds_since(t0);
    return {worst >= -1e-8 && secs < 30.0, fmt("500 instances, min eigenvalue %.2e, %.2f s", worst, secs)};
}

Outcome ac6() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(2006);
    int verdicts = 0;
    double recon = 0.0, comm = 0.0;
    std::string firstFailure;
    for (int i = 0; i < 100; ++i) {
        const auto d = static_cast<Eigen::Index>(2 + i % 3);
        const auto k = random_selfadjoint_family(d, 2 + static_cast<std::size_t>(i % 2), mix_seed(2006, static_cast<std::uint64_t>(i)));
        rigidity.record(k);
        const auto basis = hermitian_basis(commutant_basis(k));
        const HermMatrix a = positivize(random_combination(basis, d, rng));
        const auto t = spectral_peel(k, a);
        verdicts += t.verdict ? 1 : 0;
        if (!t.verdict && firstFailure.empty())
            firstFailure = t.failure;
        recon = std::max(recon, t.reconstructionResidual);
        for (const auto& s : t.steps)
            comm = std::max(comm, s.commutatorResidual);
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = verdicts == 100 && recon <= 1e-9 && comm <= 1e-7 && secs < 30.0;
    o.detail = std::to_string(verdicts) + "/100 verdicts" +
               fmt(", reconstruction %.2e, step commutators %.2e, %.2f s", recon, comm, secs);
    if (!firstFailure.empty())
        o.detail += " (" + firstFailure + ")";
    return o;
}

Outcome ac7() {
    Rng rng = make_rng(2007);
    std::uniform_real_distribution<double> w(0.1, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto d = static_cast<Eigen::Index>(1 + i % 5);
        std::vector<KrausTerm> terms;
        for (int t = 0; t < 1 + i % 4; ++t)
            terms.push_back({w(rng), random_ginibre(d, d, rng)});
        const KrausFamily k(std::move(terms));
        rigidity.record(k);
        const CMatrix a = random_ginibre(d, d, rng);
        worst = std::max(worst, (vec(apply_map(k, a)) - superoperator_matrix(k).matrix * vec(a)).norm());
    }
    return {worst <= 1e-10, fmt("100 instances, max residual %.2e", worst)};
}

Outcome ac8() {
    const bool fired = rigidity.bistochastic > 0 && rigidity.bistochasticFired == rigidity.bistochastic;
    return {rigidity.ok && fired,
            std::to_string(rigidity.checked) + " families with both flags, " + std::to_string(rigidity.bistochasticFired) +
                "/" + std::to_string(rigidity.bistochastic) + " bistochastic" +
                fmt(", max ||e - 1|| %.2e", rigidity.worst)};
}

Outcome ac9() {
    double worst = 0.0;
    bool ok = !sweep.empty();
    for (const auto& p : sweep) {
        const double anorm = herm_norm(p.a);
        CMatrix power = identity(p.a.dim());
        for (int n = 1; n <= 8; ++n) {
            power = power * p.a.matrix();
            const double bound = 1e-8 * std::max(1.0, std::pow(anorm, n));
            const double r = op_norm(apply_map(p.family, power) - power);
            worst = std::max(worst, r / bound);
            ok = ok && r <= bound;
        }
    }
    return {ok, std::to_string(sweep.size()) + " fixed points" + fmt(", worst residual/bound %.2e", worst)};
}

Outcome ac10() {
    auto run = [] {
        const char* argv[] = {"cpfix", "--json", "explore", "--trials", "50", "--seed", "7"};
        std::ostringstream out, err;
        const int code = cli::run(7, argv, out, err);
        return std::make_pair(code, out.str());
    };
    const auto [c1, first] = run();
    const auto [c2, second] = run();
    std::vector<std::string> problems;
    try {
        problems = io::validate_report_schema(io::parse_text(first));
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    const bool identical = first == second;
    Outcome o;
    o.pass = identical && problems.empty() && (c1 == 0 || c1 == 1) && c1 == c2;
    o.detail = std::string(identical ? "byte-identical" : "outputs differ") + ", " +
               (problems.empty() ? "schema valid" : "schema: " + problems.front()) + ", " +
               std::to_string(first.size()) + " bytes";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1  Lueders fixed space", ac1},
        {"AC2  bistochastic soundness sweep", ac2},
        {"AC3  Jensen inequality", ac3},
        {"AC4  trace inequality", ac4},
        {"AC5  Kadison-Schwarz", ac5},
        {"AC6  spectral peel", ac6},
        {"AC7  superoperator oracle", ac7},
        {"AC8  rigidity", ac8},
        {"AC9  power bootstrap", ac9},
        {"AC10 explorer determinism", ac10},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%-36s %s  %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
