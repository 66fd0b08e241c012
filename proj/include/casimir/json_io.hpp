#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/circulation.hpp"
#include "casimir/euler_torus.hpp"
#include "casimir/measure.hpp"
#include "casimir/moments.hpp"
#include "casimir/morse.hpp"
#include "casimir/orbit.hpp"
#include "casimir/reeb.hpp"

namespace casimir::json {

using nlohmann::json;  // std::map objects, so keys come out sorted

inline constexpr const char* version = "casimir-kit/1";

inline json document(const std::string& kind) { return json{{"version", version}, {"kind", kind}}; }

inline void require_version(const json& j) {
    if (!j.is_object() || !j.contains("version") || j.at("version") != version)
        throw ParseError(std::string("expected a document with version \"") + version + "\"");
}

inline VertexKind kind_from_string(const std::string& s) {
    for (auto k : {VertexKind::Regular, VertexKind::Min, VertexKind::Max, VertexKind::Saddle})
        if (s == to_string(k)) return k;
    throw ParseError("unknown node kind '" + s + "'");
}

inline json graph_json(const ReebGraph& g) {
    json nodes = json::array(), arcs = json::array();
    for (Index v = 0; v < g.num_nodes(); ++v)
        nodes.push_back({{"id", v}, {"f", g.nodes[v].f}, {"kind", to_string(g.nodes[v].kind)}, {"vertex", g.nodes[v].vertex}});
    for (Index e = 0; e < g.num_arcs(); ++e) arcs.push_back({{"id", e}, {"tail", g.arcs[e].tail}, {"head", g.arcs[e].head}});
    return {{"nodes", nodes}, {"arcs", arcs}, {"betti1", g.betti1()}};
}

inline ReebGraph graph_from_json(const json& j) {
    ReebGraph g;
    for (const auto& n : j.at("nodes"))
        g.nodes.push_back({n.at("f").get<double>(), kind_from_string(n.at("kind").get<std::string>()),
                           n.value("vertex", Index{-1})});
    for (const auto& a : j.at("arcs")) {
        const Index t = a.at("tail").get<Index>(), h = a.at("head").get<Index>();
        if (t < 0 || h < 0 || t >= g.num_nodes() || h >= g.num_nodes()) throw ParseError("arc endpoint out of range");
        g.arcs.push_back({t, h});
    }
    return g;
}

inline json measured_json(const MeasuredReebGraph& mg, bool profiles = false) {
    json j = graph_json(mg.graph);
    for (std::size_t e = 0; e < mg.edges.size(); ++e) {
        const auto& em = mg.edges[e];
        auto& a = j["arcs"][e];
        a["f_lo"] = em.f_lo;
        a["f_hi"] = em.f_hi;
        a["m"] = em.m;
        a["mu"] = em.mu;
        if (profiles) a["A"] = em.A;
    }
    j["total_moments"] = mg.total_moments();
    return j;
}

inline MeasuredReebGraph measured_from_json(const json& j) {
    MeasuredReebGraph mg;
    mg.graph = graph_from_json(j);
    for (Index e = 0; e < mg.graph.num_arcs(); ++e) {
        const auto& a = j.at("arcs").at(e);
        EdgeMeasure em;
        em.arc = e;
        em.f_lo = a.at("f_lo").get<double>();
        em.f_hi = a.at("f_hi").get<double>();
        em.m = a.at("m").get<std::vector<double>>();
        em.mu = a.contains("mu") ? a.at("mu").get<std::vector<double>>() : MomentSequence{em.f_lo, em.f_hi, em.m}.rescaled();
        if (a.contains("A")) em.A = a.at("A").get<std::vector<double>>();
        mg.edges.push_back(std::move(em));
    }
    return mg;
}

inline json circulation_json(const CirculationGraph& c) {
    json j = measured_json(c.measured);
    json pins = json::array();
    for (std::size_t e = 0; e < c.arcs.size(); ++e) {
        const auto& a = c.arcs[e];
        auto& arc = j["arcs"][e];
        arc["c_mid"] = a.c_mid;
        arc["c_lo_limit"] = a.c_lo_limit;
        arc["c_hi_limit"] = a.c_hi_limit;
        arc["rho"] = a.rho;
        pins.push_back({{"arc", e}, {"t", a.t_mid}, {"value", a.c_mid}});
    }
    j["pins"] = pins;
    j["residuals"] = {{"kirchhoff", c.kirchhoff_residual},
                      {"newton_leibniz", c.newton_leibniz_residual},
                      {"density_gap", c.density_gap},
                      {"tolerance", c.tolerance}};
    return j;
}

inline json violations_json(const SimplicityReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"kind", to_string(x.kind)}, {"a", x.a}, {"b", x.b}, {"value", x.value}});
    return v;
}

inline json witness_json(const Witness& w) {
    return {{"kind", to_string(w.kind)}, {"arc", w.arc}, {"discrepancy", w.discrepancy}, {"detail", w.detail}};
}

inline json feasibility_json(const FeasibilityReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"order", x.order}, {"index", x.index}, {"value", x.value}});
    return {{"feasible", r.feasible}, {"min_difference", r.min_difference}, {"violations", v}};
}

/// Moment document: top-level {lo, hi, values}, or an arc of a graph
/// document selected by `arc`.
inline MomentSequence moments_from_json(const json& j, Index arc = -1) {
    require_version(j);
    if (j.contains("values") && arc < 0)
        return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("values").get<std::vector<double>>()};
    if (!j.contains("arcs")) throw ParseError("document has neither moment values nor arcs");
    if (arc < 0) throw ParseError("graph document needs an arc index");
    if (arc >= static_cast<Index>(j.at("arcs").size())) throw ParseError("arc index out of range");
    const auto& a = j.at("arcs").at(arc);
    return {a.at("f_lo").get<double>(), a.at("f_hi").get<double>(), a.at("m").get<std::vector<double>>()};
}

inline std::vector<FourierMode> modes_from_json(const json& j) {
    const json& list = j.is_array() ? j : j.at("modes");
    std::vector<FourierMode> modes;
    for (const auto& m : list)
        modes.push_back({m.at("kx").get<int>(), m.at("ky").get<int>(), m.at("amplitude").get<double>(), m.value("phase", 0.0)});
    return modes;
}

inline json trace_json(const CasimirTrace& tr) {
    json samples = json::array();
    for (const auto& s : tr.samples)
        samples.push_back({{"t", s.t},
                           {"edge_moments", s.edge_moments},
                           {"total_moments", s.total_moments},
                           {"circulation", s.circulation},
                           {"distribution", s.distribution},
                           {"energy", s.energy},
                           {"mean", s.mean},
                           {"betti1", s.betti1}});
    json j = document("trace");
    j["graph"] = graph_json(tr.initial_graph);
    j["pin_levels"] = tr.pin_levels;
    j["level_grid"] = tr.level_grid;
    j["samples"] = samples;
    j["drift"] = {{"edge_moments", tr.drift.edge_moments}, {"total_moments", tr.drift.total_moments},
                  {"circulation", tr.drift.circulation},   {"distribution", tr.drift.distribution},
                  {"energy", tr.drift.energy},             {"mean", tr.drift.mean}};
    return j;
}

}  // namespace casimir::json
