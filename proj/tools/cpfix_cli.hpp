#pragma once

// Command-line front end. Exit codes: 0 verdict true / no violation,
// 1 verdict false / violation / failed precondition, 2 usage or format error.

#include "cpfix/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace cpfix::cli {

enum ExitCode : int { kOk = 0, kVerdictFalse = 1, kUsage = 2 };

struct GlobalOptions {
    ToleranceConfig tol;
    std::optional<std::uint64_t> seed;
    bool json = false;
    unsigned threads = 1;
};

namespace detail {

using io::Json;

inline std::uint64_t resolve_seed(const GlobalOptions& g) {
    if (g.seed)
        return *g.seed;
    if (const char* env = std::getenv("CPFIX_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw io::FormatError(std::string("CPFIX_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

inline Json config_json(const std::string& command, const GlobalOptions& g) {
    return {{"command", command}, {"tolerances", io::tolerances_to_json(g.tol)}};
}

inline void emit(std::ostream& out, const GlobalOptions& g, const Json& report, const std::string& human) {
    if (g.json)
        out << io::canonical_dump(report);
    else
        out << human;
}

inline std::string flag(bool b) { return b ? "true" : "false"; }

inline HermMatrix read_hermitian(const std::string& path, const ToleranceConfig& tol) {
    const CMatrix m = io::read_matrix(path);
    try {
        return HermMatrix(m, tol.eqTol);
    } catch (const PreconditionError& e) {
        throw io::FormatError(path + ": " + e.what());
    }
}

inline int cmd_check(const std::string& channel, const GlobalOptions& g, std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto n = normalization_report(k, g.tol);
    const auto choi = choi_psd_check(superoperator_matrix(k), g.tol);
    const bool verdict = choi.completelyPositive && n.isUnital && n.isSubunitalDual && n.rigidityHolds;
    Json hyp = io::normalization_to_json(n);
    hyp["completelyPositive"] = choi.completelyPositive;
    const Json report = {{"verdict", verdict},
                         {"hypotheses", hyp},
                         {"residuals",
                          {{"unitalResidual", n.unitalResidual},
                           {"rowResidual", n.rowResidual},
                           {"dualMinEig", n.dualMinEig},
                           {"choiMinEig", choi.minEig}}},
                         {"steps", Json::array()},
                         {"config", config_json("check", g)}};
    std::ostringstream h;
    h << "dim " << k.dim() << ", " << k.size() << " Kraus terms\n"
      << "unital:             " << flag(n.isUnital) << "\n"
      << "e <= 1:             " << flag(n.isSubunitalDual) << "\n"
      << "trace preserving:   " << flag(n.isTracePreserving) << "\n"
      << "self-adjoint:       " << flag(n.selfAdjointFamily) << "\n"
      << "rigidity:           " << flag(n.rigidityHolds) << "\n"
      << "completely positive: " << flag(choi.completelyPositive) << " (Choi min eigenvalue " << choi.minEig << ")\n"
      << "verdict: " << flag(verdict) << "\n";
    emit(out, g, report, h.str());
    return verdict ? kOk : kVerdictFalse;
}

inline int cmd_fix(const std::string& channel, const GlobalOptions& g, std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto fix = fixed_space_basis(k, g.tol);
    bool verdict = true;
    Json steps = Json::array();
    for (std::size_t i = 0; i < fix.hermBasis.size(); ++i) {
        verdict = verdict && fix.residuals[i] <= g.tol.eqTol;
        steps.push_back({{"matrix", io::matrix_to_json(fix.hermBasis[i].matrix())}, {"residual", fix.residuals[i]}});
    }
    const Json report = {{"verdict", verdict},
                         {"hypotheses", {{"unital", !fix.nonUnitalWarning}}},
                         {"residuals",
                          {{"dimension", fix.dimension},
                           {"rankAmbiguous", fix.rankAmbiguous},
                           {"dimensionMismatch", fix.dimensionMismatch}}},
                         {"steps", std::move(steps)},
                         {"config", config_json("fix", g)}};
    std::ostringstream h;
    h << "fixed-point space dimension " << fix.dimension << "\n";
    if (fix.nonUnitalWarning)
        h << "warning: channel is not unital\n";
    if (fix.rankAmbiguous)
        h << "warning: rank decision is close to the threshold\n";
    for (std::size_t i = 0; i < fix.hermBasis.size(); ++i)
        h << "basis[" << i << "] residual " << fix.residuals[i] << "\n" << fix.hermBasis[i].matrix() << "\n";
    emit(out, g, report, h.str());
    return verdict ? kOk : kVerdictFalse;
}

inline int cmd_commutant(const std::string& channel, const GlobalOptions& g, std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto comm = commutant_basis(k, g.tol);
    const auto ops = k.operators();
    Json steps = Json::array();
    bool verdict = true;
    std::ostringstream h;
    h << "commutant dimension " << comm.dimension << "\n";
    for (std::size_t i = 0; i < comm.elements.size(); ++i) {
        const double r = max_commutator(comm.elements[i], ops);
        verdict = verdict && r <= g.tol.eqTol;
        steps.push_back({{"matrix", io::matrix_to_json(comm.elements[i])}, {"residual", r}});
        h << "basis[" << i << "] residual " << r << "\n" << comm.elements[i] << "\n";
    }
    const Json report = {{"verdict", verdict},
                         {"hypotheses", Json::object()},
                         {"residuals", {{"dimension", comm.dimension}, {"rankAmbiguous", comm.rankAmbiguous}}},
                         {"steps", std::move(steps)},
                         {"config", config_json("commutant", g)}};
    emit(out, g, report, h.str());
    return verdict ? kOk : kVerdictFalse;
}

inline std::string theorem_human(const TheoremReport& r) {
    std::ostringstream h;
    h << r.subject << " verdict: " << flag(r.verdict) << "\n"
      << "  unital " << flag(r.hypotheses.unital) << ", e<=1 " << flag(r.hypotheses.subunitalDual)
      << ", Phi(M)<=M " << flag(r.hypotheses.invariance) << ", a in M " << flag(r.hypotheses.aInAlgebra)
      << ", a>=0 " << flag(r.hypotheses.aPositive) << ", Phi(a)>=a " << flag(r.hypotheses.superFixed) << "\n";
    if (r.traceGap)
        h << "  trace gap tau(a)-tau(Phi(a)) = " << *r.traceGap << "\n";
    h << "  ||Phi(a)-a|| = " << r.fixednessResidual << "\n"
      << "  max_t ||[a,x_t]|| = " << r.commutatorResidual << "\n";
    for (const auto& f : r.failures)
        h << "  failed: " << f << "\n";
    return h.str();
}

inline int cmd_verify(const std::string& channel, const std::string& element, const std::string& algebra,
                      int powers, bool corollary, const GlobalOptions& g, std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto a = read_hermitian(element, g.tol);
    const auto m = algebra.empty() ? BlockAlgebra::full(static_cast<int>(k.dim())) : io::read_algebra(algebra);
    TheoremOptions opt;
    opt.powerDepth = powers;
    const auto r = corollary ? corollary_verify(k, m, a, g.tol, opt) : theorem_verify(k, m, a, g.tol, opt);
    Json report = io::theorem_report_to_json(r);
    report["config"] = config_json(corollary ? "corollary" : "verify", g);
    report["config"]["powers"] = powers;
    report["config"]["algebra"] = io::algebra_to_json(m);
    emit(out, g, report, theorem_human(r));
    return r.verdict ? kOk : kVerdictFalse;
}

inline int cmd_peel(const std::string& channel, const std::string& element, const GlobalOptions& g,
                    std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto a = read_hermitian(element, g.tol);
    const auto p = spectral_peel(k, a, g.tol);
    Json report = io::peel_to_json(p);
    report["config"] = config_json("peel", g);
    std::ostringstream h;
    h << "peel verdict: " << flag(p.verdict) << "\n";
    for (std::size_t i = 0; i < p.steps.size(); ++i)
        h << "  step " << i << ": lambda " << p.steps[i].lambda << " (multiplicity " << p.steps[i].multiplicity
          << "), ||[x_t,p]|| " << p.steps[i].commutatorResidual << ", ||Phi(p)-p|| " << p.steps[i].fixednessResidual
          << "\n";
    h << "  reconstruction residual " << p.reconstructionResidual << "\n";
    if (!p.failure.empty())
        h << "  failed: " << p.failure << "\n";
    emit(out, g, report, h.str());
    return p.verdict ? kOk : kVerdictFalse;
}

inline int cmd_jensen(const std::string& channel, const std::string& element, double eps, const GlobalOptions& g,
                      std::ostream& out) {
    const auto k = io::read_channel(channel);
    const auto a = read_hermitian(element, g.tol);
    const auto r = jensen_residual(k, EpsFunction(eps), a, g.tol);
    Json report = {{"verdict", r.verdict},
                   {"hypotheses", Json::object()},
                   {"residuals", io::residual_to_json(r)},
                   {"steps", Json::array()},
                   {"config", config_json("jensen", g)}};
    report["config"]["eps"] = eps;
    std::ostringstream h;
    h << "Jensen residual min eigenvalue " << r.minEig << " (verdict " << flag(r.verdict) << ")\n";
    emit(out, g, report, h.str());
    return r.verdict ? kOk : kVerdictFalse;
}

inline int cmd_explore(const TrialConfig& cfg, const GlobalOptions& g, std::ostream& out) {
    const auto r = hypothesis_explorer(cfg, g.tol, g.threads);
    Json report = io::exploration_to_json(r);
    report["config"]["tolerances"] = io::tolerances_to_json(g.tol);
    std::ostringstream h;
    h << r.config.trials << " trials, " << r.violations << " violation(s), max commutator residual "
      << r.maxCommutatorResidual << " (threshold " << r.threshold << ")\n";
    emit(out, g, report, h.str());
    return r.verdict ? kOk : kVerdictFalse;
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Fixed points of completely positive maps given by weighted Kraus families"};
    app.name("cpfix");
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--tol", g.tol.eqTol, "Equality tolerance (relative to max(1, norm))")->capture_default_str();
    app.add_option("--psd-tol", g.tol.psdTol, "Positivity tolerance")->capture_default_str();
    auto* seedOpt = app.add_option("--seed", seed, "Random seed (falls back to $CPFIX_SEED, then 0)");
    app.add_flag("--json", g.json, "Print a canonical JSON report");
    app.add_option("--threads", g.threads, "Worker threads for randomized trials")->capture_default_str();

    std::string channel, element, algebra;
    int powers = 8;
    double eps = 0.0;

    auto* check = app.add_subcommand("check", "Normalization flags and complete positivity");
    check->add_option("channel", channel, "Channel JSON")->required();
    auto* fix = app.add_subcommand("fix", "Basis of the fixed-point space");
    fix->add_option("channel", channel, "Channel JSON")->required();
    auto* comm = app.add_subcommand("commutant", "Basis of the commutant of the Kraus operators");
    comm->add_option("channel", channel, "Channel JSON")->required();
    auto* verify = app.add_subcommand("verify", "Run the fixed-point theorem pipeline");
    verify->add_option("channel", channel, "Channel JSON")->required();
    verify->add_option("a", element, "Hermitian matrix JSON")->required();
    verify->add_option("--algebra", algebra, "Block algebra JSON (default: all matrices)");
    verify->add_option("--powers", powers, "Power depth N")->capture_default_str()->check(CLI::Range(1, 64));
    auto* corollary = app.add_subcommand("corollary", "Fixed points with finite square commute with the family");
    corollary->add_option("channel", channel, "Channel JSON")->required();
    corollary->add_option("a", element, "Hermitian matrix JSON")->required();
    corollary->add_option("--algebra", algebra, "Block algebra JSON (default: all matrices)");
    auto* peel = app.add_subcommand("peel", "Eigenprojection peeling for self-adjoint families");
    peel->add_option("channel", channel, "Channel JSON")->required();
    peel->add_option("a", element, "Hermitian matrix JSON")->required();
    auto* jensen = app.add_subcommand("jensen", "Jensen operator inequality residual for f_eps");
    jensen->add_option("channel", channel, "Channel JSON")->required();
    jensen->add_option("a", element, "Hermitian matrix JSON")->required();
    jensen->add_option("--eps", eps, "eps in f_eps(t) = t^2/(1 - eps t)")->required();

    TrialConfig trial;
    std::string mode = "unital-only", source = "generic";
    auto* explore = app.add_subcommand("explore", "Search for fixed points outside the commutant");
    explore->add_option("--mode", mode, "unital-only | subunital-only")
        ->capture_default_str()
        ->check(CLI::IsMember({"unital-only", "subunital-only"}));
    explore->add_option("--source", source, "generic | bistochastic")
        ->capture_default_str()
        ->check(CLI::IsMember({"generic", "bistochastic"}));
    explore->add_option("--dim", trial.dim, "Matrix dimension")->capture_default_str()->check(CLI::Range(1, 16));
    explore->add_option("--trials", trial.trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "cpfix: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*seedOpt)
            g.seed = seed;
        g.tol.validate();
        if (*check) return detail::cmd_check(channel, g, out);
        if (*fix) return detail::cmd_fix(channel, g, out);
        if (*comm) return detail::cmd_commutant(channel, g, out);
        if (*verify) return detail::cmd_verify(channel, element, algebra, powers, false, g, out);
        if (*corollary) return detail::cmd_verify(channel, element, algebra, powers, true, g, out);
        if (*peel) return detail::cmd_peel(channel, element, g, out);
        if (*jensen) return detail::cmd_jensen(channel, element, eps, g, out);
        if (*explore) {
            trial.seed = detail::resolve_seed(g);
            trial.mode = mode == "unital-only" ? ExploreMode::UnitalOnly : ExploreMode::SubunitalOnly;
            trial.source = source == "generic" ? ExploreSource::Generic : ExploreSource::Bistochastic;
            return detail::cmd_explore(trial, g, out);
        }
    } catch (const io::FormatError& e) {
        err << "cpfix: " << e.what() << "\n";
        return kUsage;
    } catch (const DimensionError& e) {
        err << "cpfix: " << e.what() << "\n";
        return kUsage;
    } catch (const PreconditionError& e) {
        err << "cpfix: precondition failed: " << e.what() << "\n";
        if (g.json)
            out << io::canonical_dump({{"verdict", false},
                                       {"hypotheses", io::Json::object()},
                                       {"residuals", io::Json::object()},
                                       {"steps", io::Json::array()},
                                       {"failures", {e.what()}},
                                       {"config", detail::config_json(app.get_subcommands().front()->get_name(), g)}});
        return kVerdictFalse;
    } catch (const DomainError& e) {
        err << "cpfix: " << e.what() << "\n";
        return kVerdictFalse;
    } catch (const NumericalError& e) {
        err << "cpfix: " << e.what() << "\n";
        return kVerdictFalse;
    }
    return kUsage;
}

}  // namespace cpfix::cli
