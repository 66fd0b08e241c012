#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "casimir/circulation.hpp"
#include "casimir/errors.hpp"
#include "casimir/measure.hpp"
#include "casimir/morse.hpp"
#include "casimir/reeb.hpp"

namespace casimir {

struct OrbitOptions {
    int n_moments = 16;
    double tol_rel = 1e-6;   // rescaled moment discrepancy, relative to arc mass
    double tol_circ = 1e-6;  // circulation limits, relative to the circulation scale
    double tol_f = 1e-8;     // node values, relative to the value range
    CirculationOptions circulation{};
};

enum class WitnessKind { None, NodeCount, ArcCount, NodeKinds, NodeValues, ArcMoments, Circulation, Incidence };

inline const char* to_string(WitnessKind k) {
    switch (k) {
        case WitnessKind::None: return "none";
        case WitnessKind::NodeCount: return "node-count";
        case WitnessKind::ArcCount: return "arc-count";
        case WitnessKind::NodeKinds: return "node-kinds";
        case WitnessKind::NodeValues: return "node-values";
        case WitnessKind::ArcMoments: return "edge-moments";
        case WitnessKind::Circulation: return "circulation";
        case WitnessKind::Incidence: return "incidence";
    }
    return "?";
}

/// The first invariant found to separate two graphs. For ArcMoments and
/// Circulation, `arc` is an arc of the first graph and `discrepancy` the
/// smallest discrepancy against any arc of the second.
struct Witness {
    WitnessKind kind = WitnessKind::None;
    Index arc = -1;
    double discrepancy = 0.0;
    std::string detail;
};

struct GraphMatching {
    std::vector<Index> node_map;  // node of G1 -> node of G2
    std::vector<Index> arc_map;
    double moment_discrepancy = 0.0;
    double circulation_discrepancy = 0.0;
};

struct IsoResult {
    bool isomorphic = false;
    GraphMatching matching;
    Witness witness;

    explicit operator bool() const { return isomorphic; }
};

/// max_i |mu1_i - mu2_i| / max(m0) over the first n rescaled moments.
inline double moment_discrepancy(const EdgeMeasure& a, const EdgeMeasure& b, int n) {
    const double den = std::max({a.mu[0], b.mu[0], 1e-300});
    double d = 0.0;
    for (int i = 0; i < n; ++i) d = std::max(d, std::abs(a.mu[i] - b.mu[i]) / den);
    return d;
}

namespace detail {

struct ArcLimits {
    double lo, hi;
};

class Matcher {
public:
    Matcher(const MeasuredReebGraph& g1, const MeasuredReebGraph& g2, const OrbitOptions& opt,
            const std::vector<ArcLimits>* c1, const std::vector<ArcLimits>* c2)
        : g1_(g1), g2_(g2), opt_(opt), c1_(c1), c2_(c2) {}

    IsoResult run() {
        IsoResult out;
        const auto& a = g1_.graph;
        const auto& b = g2_.graph;
        if (a.num_nodes() != b.num_nodes()) return fail(out, WitnessKind::NodeCount, "node counts differ");
        if (a.num_arcs() != b.num_arcs()) return fail(out, WitnessKind::ArcCount, "arc counts differ");
        for (const auto* g : {&g1_, &g2_})
            for (const auto& em : g->edges)
                if (static_cast<int>(em.mu.size()) < opt_.n_moments)
                    throw std::invalid_argument("measured graph carries fewer moments than requested");

        auto kinds = [](const ReebGraph& g) {
            std::vector<int> k;
            for (const auto& n : g.nodes) k.push_back(static_cast<int>(n.kind));
            std::sort(k.begin(), k.end());
            return k;
        };
        if (kinds(a) != kinds(b)) return fail(out, WitnessKind::NodeKinds, "critical point types differ");

        double fmin = a.nodes[0].f, fmax = a.nodes[0].f;
        for (const auto* g : {&a, &b})
            for (const auto& n : g->nodes) fmin = std::min(fmin, n.f), fmax = std::max(fmax, n.f);
        ftol_ = opt_.tol_f * std::max(fmax - fmin, 1e-300);
        auto values = [](const ReebGraph& g) {
            std::vector<double> v;
            for (const auto& n : g.nodes) v.push_back(n.f);
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto va = values(a), vb = values(b);
        for (std::size_t i = 0; i < va.size(); ++i)
            if (std::abs(va[i] - vb[i]) > ftol_)
                return fail(out, WitnessKind::NodeValues, "critical values differ", -1, std::abs(va[i] - vb[i]));

        if (c1_ && c2_) {
            for (const auto* c : {c1_, c2_})
                for (const auto& l : *c) cscale_ = std::max({cscale_, std::abs(l.lo), std::abs(l.hi)});
        }

        // Candidate lists by arc invariants alone.
        const Index na = a.num_arcs();
        cand_.assign(na, {});
        std::vector<double> best_m(na, INFINITY), best_c(na, INFINITY);
        for (Index e = 0; e < na; ++e) {
            for (Index h = 0; h < na; ++h) {
                if (!node_ok(a.arcs[e].tail, b.arcs[h].tail) || !node_ok(a.arcs[e].head, b.arcs[h].head)) continue;
                const double dm = moment_discrepancy(g1_.edges[e], g2_.edges[h], opt_.n_moments);
                best_m[e] = std::min(best_m[e], dm);
                if (dm > opt_.tol_rel) continue;
                const double dc = circ_discrepancy(e, h);
                best_c[e] = std::min(best_c[e], dc);
                if (dc > opt_.tol_circ) continue;
                cand_[e].push_back(h);
            }
            std::sort(cand_[e].begin(), cand_[e].end(), [&](Index x, Index y) {
                return moment_discrepancy(g1_.edges[e], g2_.edges[x], opt_.n_moments) <
                       moment_discrepancy(g1_.edges[e], g2_.edges[y], opt_.n_moments);
            });
        }
        for (Index e = 0; e < na; ++e) {
            if (best_m[e] > opt_.tol_rel)
                return fail(out, WitnessKind::ArcMoments, "no arc of the second graph carries the moments of arc " + std::to_string(e), e, best_m[e]);
        }
        for (Index e = 0; e < na; ++e) {
            if (cand_[e].empty())
                return fail(out, WitnessKind::Circulation, "no arc of the second graph carries the circulation of arc " + std::to_string(e), e, best_c[e]);
        }

        // Arcs ordered by (f_lo, m0); candidates by discrepancy.
        order_.resize(na);
        std::iota(order_.begin(), order_.end(), 0);
        std::sort(order_.begin(), order_.end(), [&](Index x, Index y) {
            const auto& ex = g1_.edges[x];
            const auto& ey = g1_.edges[y];
            if (ex.f_lo != ey.f_lo) return ex.f_lo < ey.f_lo;
            return ex.mass() < ey.mass();
        });
        node_map_.assign(a.num_nodes(), -1);
        node_used_.assign(a.num_nodes(), 0);
        arc_map_.assign(na, -1);
        arc_used_.assign(na, 0);
        if (!search(0)) {
            const bool circ = c1_ && c2_;
            if (circ) {
                // Distinguish a circulation obstruction from a structural one.
                Matcher plain(g1_, g2_, opt_, nullptr, nullptr);
                if (plain.run())
                    return fail(out, WitnessKind::Circulation, "graphs match only with different circulations");
            }
            return fail(out, WitnessKind::Incidence, "no incidence-preserving bijection respects the arc invariants");
        }
        out.isomorphic = true;
        out.matching.node_map = node_map_;
        out.matching.arc_map = arc_map_;
        for (Index e = 0; e < na; ++e) {
            out.matching.moment_discrepancy = std::max(
                out.matching.moment_discrepancy, moment_discrepancy(g1_.edges[e], g2_.edges[arc_map_[e]], opt_.n_moments));
            out.matching.circulation_discrepancy = std::max(out.matching.circulation_discrepancy, circ_discrepancy(e, arc_map_[e]));
        }
        return out;
    }

private:
    static IsoResult& fail(IsoResult& r, WitnessKind k, std::string detail, Index arc = -1, double d = 0.0) {
        r.isomorphic = false;
        r.witness = {k, arc, d, std::move(detail)};
        return r;
    }

    bool node_ok(Index u, Index v) const {
        const auto& x = g1_.graph.nodes[u];
        const auto& y = g2_.graph.nodes[v];
        return x.kind == y.kind && std::abs(x.f - y.f) <= ftol_;
    }

    double circ_discrepancy(Index e, Index h) const {
        if (!c1_ || !c2_ || cscale_ == 0.0) return 0.0;
        const auto& x = (*c1_)[e];
        const auto& y = (*c2_)[h];
        return std::max(std::abs(x.lo - y.lo), std::abs(x.hi - y.hi)) / cscale_;
    }

    bool bind(Index u, Index v, std::vector<Index>& bound) {
        if (node_map_[u] == v) return true;
        if (node_map_[u] != -1 || node_used_[v]) return false;
        node_map_[u] = v;
        node_used_[v] = 1;
        bound.push_back(u);
        return true;
    }

    bool search(std::size_t k) {
        if (k == order_.size()) return true;
        const Index e = order_[k];
        const auto& arc = g1_.graph.arcs[e];
        for (Index h : cand_[e]) {
            if (arc_used_[h]) continue;
            const auto& target = g2_.graph.arcs[h];
            std::vector<Index> bound;
            if (bind(arc.tail, target.tail, bound) && bind(arc.head, target.head, bound)) {
                arc_map_[e] = h;
                arc_used_[h] = 1;
                if (search(k + 1)) return true;
                arc_used_[h] = 0;
                arc_map_[e] = -1;
            }
            for (Index u : bound) {
                node_used_[node_map_[u]] = 0;
                node_map_[u] = -1;
            }
        }
        return false;
    }

    const MeasuredReebGraph& g1_;
    const MeasuredReebGraph& g2_;
    const OrbitOptions& opt_;
    const std::vector<ArcLimits>* c1_;
    const std::vector<ArcLimits>* c2_;
    double ftol_ = 0.0;
    double cscale_ = 0.0;
    std::vector<std::vector<Index>> cand_;
    std::vector<Index> order_, node_map_, arc_map_;
    std::vector<char> node_used_, arc_used_;
};

inline std::vector<ArcLimits> limits_of(const CirculationGraph& c) {
    std::vector<ArcLimits> out;
    for (const auto& a : c.arcs) out.push_back({a.c_lo_limit, a.c_hi_limit});
    return out;
}

}  // namespace detail

/// Isomorphism of measured Reeb graphs preserving node kinds, node values
/// and the first n rescaled moments of every arc.
inline IsoResult measured_iso(const MeasuredReebGraph& g1, const MeasuredReebGraph& g2, const OrbitOptions& opt = {}) {
    return detail::Matcher(g1, g2, opt, nullptr, nullptr).run();
}

/// measured_iso that also requires matching circulation limits on every arc.
inline IsoResult circulation_iso(const CirculationGraph& c1, const CirculationGraph& c2, const OrbitOptions& opt = {}) {
    const auto l1 = detail::limits_of(c1), l2 = detail::limits_of(c2);
    return detail::Matcher(c1.measured, c2.measured, opt, &l1, &l2).run();
}

struct OrbitReport {
    bool same = false;
    IsoResult measured;
    IsoResult circulation;
    CirculationGraph first;
    CirculationGraph second;
    Witness witness() const { return measured ? circulation.witness : measured.witness; }
};

/// Vorticity of a coset; a supplied field must agree with the curl.
inline std::vector<double> coset_vorticity(const TriangulatedSurface& s, const DiscreteOneForm& a,
                                           const std::vector<double>* field = nullptr, double tol = 1e-6) {
    if (static_cast<Index>(a.values().size()) != s.num_edges())
        throw CountMismatch("one-form has " + std::to_string(a.values().size()) + " values for " +
                            std::to_string(s.num_edges()) + " edges");
    auto F = curl(s, a);
    if (!field) return F;
    if (static_cast<Index>(field->size()) != s.num_vertices()) throw CountMismatch("field length differs from vertex count");
    double scale = 0.0, err = 0.0;
    for (Index v = 0; v < s.num_vertices(); ++v) {
        scale = std::max(scale, std::abs(F[v]));
        err = std::max(err, std::abs(F[v] - (*field)[v]));
    }
    if (err > tol * std::max(scale, 1e-300))
        throw InconsistentInput("field differs from the curl of the one-form by " + std::to_string(err));
    return *field;
}

/// Decides whether two cosets lie in one orbit by comparing their
/// circulation graphs. Throws NotSimple when a vorticity is not simple.
inline OrbitReport same_orbit(const TriangulatedSurface& s1, const DiscreteOneForm& a1, const TriangulatedSurface& s2,
                              const DiscreteOneForm& a2, const OrbitOptions& opt = {},
                              const std::vector<double>* field1 = nullptr, const std::vector<double>* field2 = nullptr) {
    auto pipeline = [&](const TriangulatedSurface& s, const DiscreteOneForm& a, const std::vector<double>* field) {
        const auto f = classify_vertices(s, coset_vorticity(s, a, field));
        require_simple(f, s);
        CirculationOptions co = opt.circulation;
        co.n_moments = std::max(co.n_moments, opt.n_moments);
        return build_circulation_graph(s, f, a, co);
    };
    OrbitReport r;
    r.first = pipeline(s1, a1, field1);
    r.second = pipeline(s2, a2, field2);
    r.measured = measured_iso(r.first.measured, r.second.measured, opt);
    r.circulation = r.measured ? circulation_iso(r.first, r.second, opt) : r.measured;
    r.same = r.circulation.isomorphic;
    return r;
}

}  // namespace casimir
