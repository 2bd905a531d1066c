#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "fibers.hpp"
#include "monodromy.hpp"
#include "product.hpp"
#include "thin.hpp"
#include "tolerances.hpp"

namespace blaschke {

using json = nlohmann::json;

/// Clamp non-finite doubles before they reach a report.
inline double report_real(double x) {
    if (std::isnan(x)) return 0.0;
    if (std::isinf(x)) return x > 0.0 ? 1e308 : -1e308;
    return x;
}

inline json carr(cplx z) { return json::array({report_real(z.real()), report_real(z.imag())}); }

namespace detail {

inline void dump_json(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad1(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                out += json(it.key()).dump();
                out += ": ";
                dump_json(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                dump_json(v, out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            char buf[40];
            double v = j.get<double>();
            if (std::isnan(v)) v = 0.0;
            if (std::isinf(v)) v = v > 0.0 ? 1e308 : -1e308;
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

} // namespace detail

/// Fixed-format serialization: keys sorted (the underlying object is a sorted
/// map), floats at 17 significant digits, two-space indent. Identical
/// documents serialize to identical bytes.
inline std::string json_dump(const json& j) {
    std::string out;
    detail::dump_json(j, out, 0);
    out += "\n";
    return out;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spec_error("cannot open input file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw spec_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline cplx read_cplx(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw spec_error(what + " must be a [re, im] pair");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

/// Product file: {"constant": [re,im], "zeros": [{"z": [re,im], "m": int}, ...]}.
/// The constant defaults to 1 and multiplicities to 1.
inline FiniteBlaschke read_product(const json& j,
                                   const Tolerances& tol = Tolerances::defaults()) {
    if (!j.is_object()) throw spec_error("product spec must be a JSON object");
    cplx c(1.0, 0.0);
    if (j.contains("constant")) c = read_cplx(j["constant"], "constant");
    if (!j.contains("zeros") || !j["zeros"].is_array() || j["zeros"].empty())
        throw spec_error("product spec needs a nonempty \"zeros\" array");
    std::vector<ZeroFactor> zeros;
    for (const auto& zj : j["zeros"]) {
        if (!zj.is_object() || !zj.contains("z"))
            throw spec_error("each zero needs a \"z\" field");
        int m = 1;
        if (zj.contains("m")) {
            if (!zj["m"].is_number_integer())
                throw spec_error("zero multiplicity must be an integer");
            m = zj["m"].get<int>();
        }
        zeros.push_back({DiskPoint(read_cplx(zj["z"], "zero"), tol), m});
    }
    return FiniteBlaschke(c, std::move(zeros), tol);
}

/// Sequence file: {"rule": "factorial"|"ratio"|"explicit", "N": int, "args": {...}}.
/// A previously emitted sequence report (with a "points" array) also loads,
/// via the explicit rule.
inline ThinSpec read_sequence_spec(const json& j) {
    if (!j.is_object()) throw spec_error("sequence spec must be a JSON object");
    if (j.contains("sequence") && j["sequence"].is_object())
        return read_sequence_spec(j["sequence"]);
    ThinSpec spec;
    if (j.contains("points") && j["points"].is_array()) {
        spec.rule = "explicit";  // materialized points win over the rule tag
    } else if (j.contains("rule")) {
        spec.rule = j["rule"].get<std::string>();
    } else {
        throw spec_error("sequence spec needs a \"rule\"");
    }
    if (j.contains("N")) spec.N = j["N"].get<std::size_t>();
    const json args = j.contains("args") ? j["args"] : json::object();
    if (spec.rule == "ratio") {
        if (args.contains("c")) spec.ratio_c = args["c"].get<double>();
        if (args.contains("start")) spec.start_decrement = args["start"].get<double>();
    }
    if (spec.rule == "explicit") {
        const json* pts = nullptr;
        if (args.contains("points")) pts = &args["points"];
        else if (j.contains("points")) pts = &j["points"];
        if (!pts || !pts->is_array())
            throw spec_error("explicit rule needs args.points");
        for (const auto& p : *pts) {
            if (!p.is_object() || !p.contains("decrement") || !p.contains("argument"))
                throw spec_error("explicit points need decrement and argument");
            spec.points.push_back({p["decrement"].get<double>(), p["argument"].get<double>()});
        }
        if (spec.N == 0) spec.N = spec.points.size();
    }
    if (spec.N == 0) throw spec_error("sequence spec needs N >= 1");
    return spec;
}

inline json product_json(const FiniteBlaschke& B) {
    json zeros = json::array();
    for (const ZeroFactor& f : B.zeros())
        zeros.push_back(json{{"m", f.multiplicity}, {"z", carr(f.z.value())}});
    return json{{"constant", carr(B.constant())}, {"zeros", zeros}};
}

/// Full invariant report: critical data, monodromy generators, component
/// decomposition, gluing edges, and regularity margins.
inline json report_analyze(const FiniteBlaschke& B, const std::vector<cplx>& exempt,
                           const Tolerances& tol = Tolerances::defaults()) {
    const CriticalData cd = critical_data(B, tol);
    const ComponentReport comp = surface_components(B, tol);
    const GluingGraph glue = gluing_graph(B, tol);
    const Theorem41Report thm = theorem41_conditions(B, exempt, tol);

    json critical_points = json::array();
    for (const CriticalPoint& p : cd.points)
        critical_points.push_back(json{{"multiplicity", p.multiplicity},
                                       {"value", carr(p.value)},
                                       {"z", carr(p.z)}});

    // loop order: value list as the generators were produced
    json critical_values = json::array();
    if (B.degree() >= 2) {
        const LoopSet ls = generator_loops(cd.exceptional, comp.w0, tol);
        for (const cplx& v : ls.values) critical_values.push_back(carr(v));
    }
    json generators = json::array();
    for (const Permutation& g : comp.generators) generators.push_back(g.im);
    json orbits = json::array();
    for (const auto& o : comp.orbits) orbits.push_back(o);
    json glue_edges = json::array();
    for (const GlueEdge& e : glue.edges)
        glue_edges.push_back(json::array({e.i, e.j, carr(e.value)}));

    json rotation;
    const std::optional<RotationStructure> rot = detect_rotational_structure(B, tol);
    if (rot) {
        rotation = json{{"found", true},
                        {"mu", carr(rot->mu)},
                        {"n", rot->n},
                        {"residual", report_real(rot->residual)}};
    } else {
        rotation = json{{"found", false}};
    }

    return json{
        {"degree", B.degree()},
        {"constant", carr(B.constant())},
        {"conditioning_warning", cd.conditioning_warning},
        {"basepoint", carr(comp.w0)},
        {"critical_points", critical_points},
        {"critical_values", critical_values},
        {"generators", generators},
        {"group_order", comp.group_order},
        {"q", comp.q},
        {"orbits", orbits},
        {"multiplicities", comp.multiplicities},
        {"inverse_pairing", comp.inverse_pairing},
        {"glue_edges", glue_edges},
        {"glue_connected", glue.connected},
        {"rotation", rotation},
        {"thm41", json{{"pass", thm.holds},
                       {"simple_margin", report_real(thm.simple_margin)},
                       {"injectivity_margin", report_real(thm.injectivity_margin)}}},
    };
}

inline json report_glue(const FiniteBlaschke& B,
                        const Tolerances& tol = Tolerances::defaults()) {
    const GluingGraph glue = gluing_graph(B, tol);
    json edges = json::array();
    for (const GlueEdge& e : glue.edges)
        edges.push_back(json{{"i", e.i},
                             {"j", e.j},
                             {"value", carr(e.value)},
                             {"witness", carr(e.witness)}});
    return json{{"basepoint", carr(glue.w0)},
                {"connected", glue.connected},
                {"glue_edges", edges},
                {"sheets", glue.sheets}};
}

inline json sequence_json(const ZeroSequence& seq) {
    json pts = json::array();
    for (const SeqPoint& p : seq.points)
        pts.push_back(json{{"argument", report_real(p.argument)},
                           {"decrement", report_real(p.decrement)}});
    return json{{"blaschke_sum", report_real(seq.blaschke_sum())},
                {"points", pts},
                {"rule", seq.source_tag}};
}

inline json thinness_json(const std::vector<ThinnessRow>& rows) {
    json arr = json::array();
    for (const ThinnessRow& r : rows) {
        json row{{"delta", report_real(r.delta)}, {"k", r.k}};
        if (r.cross_check) row["cross_check"] = report_real(*r.cross_check);
        arr.push_back(row);
    }
    return json{{"fraction_nondecreasing", report_real(fraction_nondecreasing(rows))},
                {"rows", arr}};
}

inline json report_extraction(const ExtractionResult& ex) {
    json idx = json::array();
    for (std::size_t i : ex.indices) idx.push_back(i);
    json certs = json::array();
    for (double c : ex.certificates) certs.push_back(report_real(c));
    return json{{"certificates", certs},
                {"indices", idx},
                {"sequence", sequence_json(ex.subsequence)}};
}

/// Stage audits with the gate margins spelled out per stage.
inline json report_construction(const ConstructionResult& cr,
                                const Tolerances& tol = Tolerances::defaults()) {
    json stages = json::array();
    for (const StageAudit& a : cr.audits) {
        json gates{
            {"a", json{{"pass", std::abs(a.outer_value) > a.r_gate || a.m == 1},
                       {"outer_value_modulus", report_real(std::abs(a.outer_value))},
                       {"threshold", report_real(a.r_gate)}}},
            {"b", json{{"pass", !(a.value_sep < tol.stage_margin)},
                       {"threshold", report_real(tol.stage_margin)},
                       {"value_separation", report_real(a.value_sep)}}},
            {"c", json{{"pass", true},
                       {"inside_count", a.inside_count},
                       {"outer_point", carr(a.outer_point)},
                       {"outside_count", 1}}},
            {"d", json{{"pass", !(a.simple_margin < tol.stage_margin)},
                       {"second_derivative_min", report_real(a.simple_margin)},
                       {"threshold", report_real(tol.stage_margin)}}},
        };
        stages.push_back(json{{"delta", report_real(a.delta)},
                              {"gates", gates},
                              {"k_radius", report_real(a.k_radius)},
                              {"lambda", carr(a.lambda)},
                              {"m", a.m},
                              {"pool_index", a.pool_index},
                              {"q", a.q},
                              {"r_m", report_real(a.r_gate)}});
    }
    return json{{"product", product_json(cr.product)}, {"stages", stages}};
}

inline json failure_document(const std::string& kind, const std::string& message,
                             const std::string& command) {
    return json{{"failure",
                 json{{"command", command}, {"kind", kind}, {"message", message}}}};
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw spec_error("cannot open output file: " + path);
    out << text;
}

} // namespace blaschke
