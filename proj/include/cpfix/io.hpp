#pragma once

// JSON formats for matrices, channels, algebras and verification reports.
//
//   channel: {"dim": d, "terms": [{"weight": w, "matrix": [[[re, im], ...], ...]}, ...]}
//   matrix:  [[[re, im], ...], ...]   (or {"matrix": [...]})
//   algebra: {"blocks": [d1, ...], "weights": [w1, ...]}
//
// Matrices are row-major. Output is canonical: keys sorted, floats printed
// with 17 significant digits.

#include "cpfix/algebra.hpp"
#include "cpfix/channel.hpp"
#include "cpfix/jensen.hpp"
#include "cpfix/verify.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpfix::io {

using Json = nlohmann::json;

/// Malformed JSON text, or a document that does not match its schema.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Json parse_text(const std::string& text, const std::string& source = "<input>") {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // byte offset -> line/column
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream os;
        os << source << ":" << line << ":" << column << ": malformed JSON: " << e.what();
        throw FormatError(os.str());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Json parse_file(const std::string& path) { return parse_text(read_file(path), path); }

namespace detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& what) {
    throw FormatError("schema error at " + path + ": " + what);
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number())
        schema(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        schema(path, "number is not finite");
    return v;
}

inline const Json& member(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object())
        schema(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        schema(path, std::string("missing field \"") + key + "\"");
    return *it;
}

inline int positive_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !(j.is_number_float() && std::floor(j.get<double>()) == j.get<double>()))
        schema(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 1 || v > 4096)
        schema(path, "expected a positive integer");
    return static_cast<int>(v);
}

}  // namespace detail

inline CMatrix matrix_from_json(const Json& j, const std::string& path = "$") {
    const Json& rows = j.is_object() ? detail::member(j, "matrix", path) : j;
    const std::string base = j.is_object() ? path + ".matrix" : path;
    if (!rows.is_array() || rows.empty())
        detail::schema(base, "expected a non-empty array of rows");
    const auto d = static_cast<Eigen::Index>(rows.size());
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Json& row = rows[static_cast<std::size_t>(i)];
        const std::string rp = base + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
            detail::schema(rp, "expected a row of " + std::to_string(d) + " entries (matrix must be square)");
        for (Eigen::Index k = 0; k < d; ++k) {
            const Json& z = row[static_cast<std::size_t>(k)];
            const std::string zp = rp + "[" + std::to_string(k) + "]";
            if (!z.is_array() || z.size() != 2)
                detail::schema(zp, "expected a complex entry [re, im]");
            m(i, k) = Complex(detail::number(z[0], zp + "[0]"), detail::number(z[1], zp + "[1]"));
        }
    }
    return m;
}

inline KrausFamily channel_from_json(const Json& j) {
    const int dim = detail::positive_int(detail::member(j, "dim", "$"), "$.dim");
    const Json& terms = detail::member(j, "terms", "$");
    if (!terms.is_array() || terms.empty())
        detail::schema("$.terms", "expected a non-empty array");
    std::vector<KrausTerm> out;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tp = "$.terms[" + std::to_string(t) + "]";
        const double w = detail::number(detail::member(terms[t], "weight", tp), tp + ".weight");
        if (!(w > 0.0))
            detail::schema(tp + ".weight", "weight must be positive");
        CMatrix x = matrix_from_json(detail::member(terms[t], "matrix", tp), tp + ".matrix");
        if (x.rows() != dim)
            detail::schema(tp + ".matrix", "dimension " + std::to_string(x.rows()) + " does not match dim " +
                                               std::to_string(dim));
        out.push_back({w, std::move(x)});
    }
    return KrausFamily(std::move(out));
}

inline BlockAlgebra algebra_from_json(const Json& j) {
    const Json& blocks = detail::member(j, "blocks", "$");
    const Json& weights = detail::member(j, "weights", "$");
    if (!blocks.is_array() || blocks.empty())
        detail::schema("$.blocks", "expected a non-empty array");
    if (!weights.is_array() || weights.size() != blocks.size())
        detail::schema("$.weights", "expected an array with one weight per block");
    std::vector<int> dims;
    std::vector<double> ws;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        dims.push_back(detail::positive_int(blocks[i], "$.blocks[" + std::to_string(i) + "]"));
        const double w = detail::number(weights[i], "$.weights[" + std::to_string(i) + "]");
        if (!(w > 0.0))
            detail::schema("$.weights[" + std::to_string(i) + "]", "weight must be positive");
        ws.push_back(w);
    }
    return BlockAlgebra(std::move(dims), std::move(ws));
}

inline CMatrix read_matrix(const std::string& path) { return matrix_from_json(parse_file(path)); }
inline KrausFamily read_channel(const std::string& path) { return channel_from_json(parse_file(path)); }
inline BlockAlgebra read_algebra(const std::string& path) { return algebra_from_json(parse_file(path)); }

inline Json matrix_to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json channel_to_json(const KrausFamily& k) {
    Json terms = Json::array();
    for (const auto& t : k.terms())
        terms.push_back({{"weight", t.weight}, {"matrix", matrix_to_json(t.op)}});
    return {{"dim", k.dim()}, {"terms", std::move(terms)}};
}

inline Json algebra_to_json(const BlockAlgebra& m) {
    return {{"blocks", m.blockDims()}, {"weights", m.traceWeights()}};
}

namespace detail {

inline void format_double(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos)
        s += ".0";
    out += s;
}

inline void dump(std::string& out, const Json& j, int indent, int depth) {
    const auto newline = [&](int level) {
        if (indent < 0)
            return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
            if (!first)
                out += ',';
            first = false;
            newline(depth + 1);
            out += Json(it.key()).dump();
            out += indent < 0 ? ":" : ": ";
            dump(out, it.value(), indent, depth + 1);
        }
        newline(depth);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // numeric leaves stay on one line
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) {
            return e.is_primitive() || (e.is_array() && std::all_of(e.begin(), e.end(), [](const Json& f) {
                                            return f.is_primitive();
                                        }));
        });
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first)
                out += flat && indent >= 0 ? ", " : ",";
            first = false;
            if (!flat)
                newline(depth + 1);
            dump(out, e, flat ? -1 : indent, depth + 1);
        }
        if (!flat)
            newline(depth);
        out += ']';
        return;
    }
    case Json::value_t::number_float:
        format_double(out, j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

}  // namespace detail

/// Canonical text: sorted keys, 17 significant digits, two-space indent.
inline std::string canonical_dump(const Json& j, int indent = 2) {
    std::string out;
    detail::dump(out, j, indent, 0);
    out += '\n';
    return out;
}

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json tolerances_to_json(const ToleranceConfig& cfg) {
    return {{"eqTol", cfg.eqTol}, {"psdTol", cfg.psdTol}, {"clusterGap", cfg.clusterGap}, {"nullTol", cfg.nullTol}};
}

inline Json residual_to_json(const IneqResidual& r) {
    return {{"minEig", r.minEig}, {"lhsNorm", r.lhsNorm}, {"rhsNorm", r.rhsNorm}, {"verdict", r.verdict}};
}

inline Json normalization_to_json(const NormalizationReport& n) {
    return {{"unital", n.isUnital},
            {"subunitalDual", n.isSubunitalDual},
            {"tracePreserving", n.isTracePreserving},
            {"selfAdjointFamily", n.selfAdjointFamily},
            {"rigidityHolds", n.rigidityHolds}};
}

inline Json theorem_report_to_json(const TheoremReport& r) {
    Json hyp = {{"unital", r.hypotheses.unital},
                {"subunitalDual", r.hypotheses.subunitalDual},
                {"invariance", r.hypotheses.invariance},
                {"aInAlgebra", r.hypotheses.aInAlgebra},
                {"aPositive", r.hypotheses.aPositive},
                {"superFixed", r.hypotheses.superFixed}};
    Json eps = Json::array();
    for (const auto& e : r.epsSteps)
        eps.push_back({{"eps", e.eps},
                       {"fixednessResidual", e.fixednessResidual},
                       {"jensenMinEig", opt(e.jensenMinEig)},
                       {"dominationMinEig", opt(e.dominationMinEig)}});
    Json proj = Json::array();
    for (const auto& p : r.projections)
        proj.push_back({{"eigenvalue", p.eigenvalue},
                        {"multiplicity", p.multiplicity},
                        {"fixednessResidual", p.fixednessResidual},
                        {"compressionResidual", p.compressionResidual},
                        {"offDiagonalResidual", p.offDiagonalResidual}});
    Json res = {{"minEigPhiMinusA", r.minEigPhiMinusA},
                {"traceGap", opt(r.traceGap)},
                {"traceChainResidual", opt(r.traceChainResidual)},
                {"fixednessResidual", r.fixednessResidual},
                {"powerResiduals", r.powerResiduals},
                {"commutatorResidual", r.commutatorResidual},
                {"eps", std::move(eps)}};
    if (r.kadisonSchwarz)
        res["kadisonSchwarz"] = residual_to_json(*r.kadisonSchwarz);
    return {{"verdict", r.verdict},
            {"subject", r.subject},
            {"hypotheses", std::move(hyp)},
            {"residuals", std::move(res)},
            {"steps", std::move(proj)},
            {"failures", r.failures}};
}

inline Json peel_to_json(const PeelTrace& p) {
    Json steps = Json::array();
    for (const auto& s : p.steps)
        steps.push_back({{"lambda", s.lambda},
                         {"multiplicity", s.multiplicity},
                         {"projection", matrix_to_json(s.projection.matrix())},
                         {"commutatorResidual", s.commutatorResidual},
                         {"fixednessResidual", s.fixednessResidual},
                         {"superFixedMinEig", s.superFixedMinEig}});
    return {{"verdict", p.verdict},
            {"hypotheses", Json::object()},
            {"residuals", {{"reconstructionResidual", p.reconstructionResidual}}},
            {"steps", std::move(steps)},
            {"failedStep", p.failedStep ? Json(*p.failedStep) : Json(nullptr)},
            {"failures", p.failure.empty() ? Json::array() : Json::array({p.failure})}};
}

inline std::string mode_name(ExploreMode m) { return m == ExploreMode::UnitalOnly ? "unital-only" : "subunital-only"; }
inline std::string source_name(ExploreSource s) { return s == ExploreSource::Generic ? "generic" : "bistochastic"; }

inline Json exploration_to_json(const ExplorationReport& r) {
    Json steps = Json::array();
    for (const auto& t : r.trials) {
        Json rec = {{"trial", t.index},
                    {"krausTerms", t.krausTerms},
                    {"blocks", t.blocks},
                    {"fixedDim", t.fixedDim},
                    {"commutantDim", t.commutantDim},
                    {"tracePreserving", t.traceOnDiagonal},
                    {"maxCommutatorResidual", t.maxCommutatorResidual},
                    {"violation", t.violation}};
        if (t.violation)
            rec["instance"] = channel_to_json(t.instance);
        steps.push_back(std::move(rec));
    }
    const Json config = {{"dim", r.config.dim},
                         {"trials", r.config.trials},
                         {"seed", r.config.seed},
                         {"mode", mode_name(r.config.mode)},
                         {"source", source_name(r.config.source)}};
    return {{"verdict", r.verdict},
            {"hypotheses", {{"mode", mode_name(r.config.mode)}}},
            {"residuals",
             {{"violations", r.violations},
              {"maxCommutatorResidual", r.maxCommutatorResidual},
              {"threshold", r.threshold}}},
            {"steps", std::move(steps)},
            {"config", config}};
}

/// Problems with a report document; empty when it matches the schema
/// {"verdict": bool, "hypotheses": {...}, "residuals": {...}, "steps": [...], "config": {...}}.
inline std::vector<std::string> validate_report_schema(const Json& j) {
    std::vector<std::string> problems;
    if (!j.is_object())
        return {"report is not an object"};
    auto need = [&](const char* key, bool (Json::*pred)() const noexcept, const char* kind) {
        const auto it = j.find(key);
        if (it == j.end())
            problems.push_back(std::string("missing \"") + key + "\"");
        else if (!((*it).*pred)())
            problems.push_back(std::string("\"") + key + "\" is not " + kind);
    };
    need("verdict", &Json::is_boolean, "a boolean");
    need("hypotheses", &Json::is_object, "an object");
    need("residuals", &Json::is_object, "an object");
    need("steps", &Json::is_array, "an array");
    need("config", &Json::is_object, "an object");
    return problems;
}

}  // namespace cpfix::io
