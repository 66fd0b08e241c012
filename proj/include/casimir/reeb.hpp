#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/errors.hpp"
#include "casimir/morse.hpp"
#include "casimir/surface.hpp"
#include "casimir/union_find.hpp"

namespace casimir {

struct ReebNode {
    double f = 0.0;
    VertexKind kind = VertexKind::Regular;
    Index vertex = -1;  // mesh vertex, -1 for abstract graphs
};

struct ReebArc {
    Index tail = -1;
    Index head = -1;
};

/// Directed graph with f-values on nodes; arcs point from lower to higher f.
struct ReebGraph {
    std::vector<ReebNode> nodes;
    std::vector<ReebArc> arcs;

    Index num_nodes() const { return static_cast<Index>(nodes.size()); }
    Index num_arcs() const { return static_cast<Index>(arcs.size()); }

    int num_components() const {
        UnionFind uf(num_nodes());
        int c = num_nodes();
        for (const auto& a : arcs)
            if (uf.unite(a.tail, a.head)) --c;
        return c;
    }

    /// First Betti number E - V + C.
    int betti1() const { return num_arcs() - num_nodes() + num_components(); }

    std::vector<std::vector<Index>> in_arcs() const {
        std::vector<std::vector<Index>> r(nodes.size());
        for (Index e = 0; e < num_arcs(); ++e) r[arcs[e].head].push_back(e);
        return r;
    }

    std::vector<std::vector<Index>> out_arcs() const {
        std::vector<std::vector<Index>> r(nodes.size());
        for (Index e = 0; e < num_arcs(); ++e) r[arcs[e].tail].push_back(e);
        return r;
    }

    /// Empty when all structural invariants hold.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (nodes.empty()) out.push_back("graph has no nodes");
        if (!nodes.empty() && num_components() != 1) out.push_back("graph is not connected");
        std::vector<int> in(nodes.size(), 0), outd(nodes.size(), 0);
        for (Index e = 0; e < num_arcs(); ++e) {
            const auto& a = arcs[e];
            if (a.tail < 0 || a.head < 0 || a.tail >= num_nodes() || a.head >= num_nodes()) {
                out.push_back("arc " + std::to_string(e) + " has an invalid endpoint");
                continue;
            }
            ++outd[a.tail];
            ++in[a.head];
            if (!(nodes[a.tail].f < nodes[a.head].f))
                out.push_back("f is not increasing along arc " + std::to_string(e));
        }
        for (Index v = 0; v < num_nodes(); ++v) {
            const int d = in[v] + outd[v];
            const bool ok = (d == 1) || (d == 3 && (in[v] == 1 || in[v] == 2));
            if (!ok)
                out.push_back("node " + std::to_string(v) + " has degree pattern (" + std::to_string(in[v]) + " in, " +
                              std::to_string(outd[v]) + " out)");
        }
        return out;
    }
};

/// A triangle's contribution to one arc: the part of the triangle with
/// values in [lo, hi]. Flat triangles are point masses.
struct ArcPiece {
    Index triangle;
    Index arc;
    double lo;
    double hi;
};

/// Mesh side of the projection onto the graph. The sweep cuts the vertex
/// order into slabs between consecutive critical vertices; slab i lies
/// between nodes i and i+1, and each arc covers slabs tail .. head-1.
struct QuotientMap {
    std::vector<Index> vertex_node;  // node of a critical vertex, else -1
    std::vector<Index> vertex_arc;   // arc of a regular vertex, else -1
    std::vector<Index> node_rank;    // vertex rank of each node
    std::vector<std::vector<Index>> seeds;  // per arc, one mesh edge per slab
    std::vector<Index> slab_offset;         // CSR triangle buckets per slab
    std::vector<Index> slab_triangles;
    std::vector<ArcPiece> pieces;

    Index num_slabs() const { return static_cast<Index>(node_rank.size()) - 1; }

    /// Slab containing the half level just above vertex rank r.
    Index slab_of_rank(Index r) const {
        auto it = std::upper_bound(node_rank.begin(), node_rank.end(), r);
        return static_cast<Index>(it - node_rank.begin()) - 1;
    }
};

struct ReebResult {
    ReebGraph graph;
    QuotientMap qmap;
};

namespace detail {

// Edges meeting one slab, grouped into components of the slab region.
struct SlabComponents {
    std::vector<Index> edges;  // local id -> mesh edge
    std::vector<Index> local;  // mesh edge -> local id, valid when stamp matches
    std::vector<Index> stamp;
    UnionFind uf;

    explicit SlabComponents(Index num_edges) : local(num_edges, -1), stamp(num_edges, -1) {}

    void build(const TriangulatedSurface& s, const MorseField& f, const QuotientMap& q, Index slab) {
        const Index r_lo = q.node_rank[slab], r_hi = q.node_rank[slab + 1];
        edges.clear();
        for (Index k = q.slab_offset[slab]; k < q.slab_offset[slab + 1]; ++k) {
            const Index t = q.slab_triangles[k];
            for (const auto& oe : s.triangle_edges(t)) {
                if (stamp[oe.edge] == slab) continue;
                if (!meets(s, f, oe.edge, r_lo, r_hi)) continue;
                stamp[oe.edge] = slab;
                local[oe.edge] = static_cast<Index>(edges.size());
                edges.push_back(oe.edge);
            }
        }
        uf.reset(static_cast<Index>(edges.size()));
        for (Index k = q.slab_offset[slab]; k < q.slab_offset[slab + 1]; ++k) {
            const Index t = q.slab_triangles[k];
            Index first = -1;
            for (const auto& oe : s.triangle_edges(t)) {
                if (stamp[oe.edge] != slab || !meets(s, f, oe.edge, r_lo, r_hi)) continue;
                if (first < 0) first = local[oe.edge];
                else uf.unite(first, local[oe.edge]);
            }
        }
        current = slab;
    }

    Index root_of_edge(Index e) {
        if (stamp[e] != current) return -1;
        return uf.find(local[e]);
    }

    static bool meets(const TriangulatedSurface& s, const MorseField& f, Index e, Index r_lo, Index r_hi) {
        const auto [lo, hi] = rank_range(s, f, e);
        return lo < r_hi && hi > r_lo;
    }

    static std::pair<Index, Index> rank_range(const TriangulatedSurface& s, const MorseField& f, Index e) {
        const Index ra = f.rank[s.edges()[e].a], rb = f.rank[s.edges()[e].b];
        return {std::min(ra, rb), std::max(ra, rb)};
    }

    Index current = -1;
};

}  // namespace detail

/// Sweep construction of the Reeb graph of a simple field.
inline ReebResult build_reeb(const TriangulatedSurface& s, const MorseField& f) {
    const SimplicityReport cert = require_simple(f, s);
    const std::vector<Index>& crit = cert.critical;
    const Index k = static_cast<Index>(crit.size());
    const Index nv = s.num_vertices();

    ReebResult out;
    ReebGraph& g = out.graph;
    QuotientMap& q = out.qmap;

    g.nodes.resize(k);
    q.node_rank.resize(k);
    q.vertex_node.assign(nv, -1);
    q.vertex_arc.assign(nv, -1);
    for (Index i = 0; i < k; ++i) {
        const Index v = crit[i];
        g.nodes[i] = {f.values[v], f.classes[v].kind, v};
        q.node_rank[i] = f.rank[v];
        q.vertex_node[v] = i;
    }
    const Index slabs = k - 1;

    // Triangle buckets: ranks p < r < s meet slabs slab(p) .. slab(s-1).
    const Index nt = s.num_triangles();
    std::vector<Index> first_slab(nt), last_slab(nt);
    q.slab_offset.assign(slabs + 1, 0);
    for (Index t = 0; t < nt; ++t) {
        const Triangle& tri = s.triangles()[t];
        const Index rmin = std::min({f.rank[tri[0]], f.rank[tri[1]], f.rank[tri[2]]});
        const Index rmax = std::max({f.rank[tri[0]], f.rank[tri[1]], f.rank[tri[2]]});
        first_slab[t] = q.slab_of_rank(rmin);
        last_slab[t] = q.slab_of_rank(rmax - 1);
        for (Index i = first_slab[t]; i <= last_slab[t]; ++i) ++q.slab_offset[i + 1];
    }
    for (Index i = 0; i < slabs; ++i) q.slab_offset[i + 1] += q.slab_offset[i];
    q.slab_triangles.resize(q.slab_offset[slabs]);
    {
        std::vector<Index> fill(q.slab_offset.begin(), q.slab_offset.end() - 1);
        for (Index t = 0; t < nt; ++t)
            for (Index i = first_slab[t]; i <= last_slab[t]; ++i) q.slab_triangles[fill[i]++] = t;
    }

    std::vector<Index> edge_arc(s.num_edges(), -1);
    detail::SlabComponents comp(s.num_edges());
    std::vector<Index> root_arc;

    for (Index i = 0; i < slabs; ++i) {
        const Index r_lo = q.node_rank[i], r_hi = q.node_rank[i + 1];
        comp.build(s, f, q, i);
        const Index ne = static_cast<Index>(comp.edges.size());
        root_arc.assign(ne, -1);

        // Components touching the lower node start new arcs.
        for (Index l = 0; l < ne; ++l) {
            const auto [lo, hi] = detail::SlabComponents::rank_range(s, f, comp.edges[l]);
            if (lo != r_lo) continue;
            const Index root = comp.uf.find(l);
            if (root_arc[root] < 0) {
                root_arc[root] = g.num_arcs();
                g.arcs.push_back({i, -1});
                q.seeds.emplace_back();
            }
        }
        std::vector<char> fresh(g.arcs.size(), 0);
        for (Index a : root_arc)
            if (a >= 0) fresh[a] = 1;
        // Others continue an arc through the lower half level.
        for (Index l = 0; l < ne; ++l) {
            const auto [lo, hi] = detail::SlabComponents::rank_range(s, f, comp.edges[l]);
            if (lo >= r_lo) continue;
            const Index root = comp.uf.find(l);
            const Index prev = edge_arc[comp.edges[l]];
            if (prev < 0) throw std::logic_error("crossing edge without an arc");
            if (root_arc[root] < 0) {
                root_arc[root] = prev;
            } else if (root_arc[root] != prev && !fresh[root_arc[root]]) {
                throw std::logic_error("slab component spans two arcs");
            }
        }
        std::vector<char> seeded(g.arcs.size(), 0);
        for (Index l = 0; l < ne; ++l) {
            const Index e = comp.edges[l];
            const Index arc = root_arc[comp.uf.find(l)];
            if (arc < 0) throw std::logic_error("slab component without an arc");
            if (!seeded[arc]) {
                seeded[arc] = 1;
                q.seeds[arc].push_back(e);
            }
            const auto [lo, hi] = detail::SlabComponents::rank_range(s, f, e);
            if (hi > r_hi) {
                edge_arc[e] = arc;
            } else if (hi == r_hi) {
                if (g.arcs[arc].head >= 0 && g.arcs[arc].head != i + 1)
                    throw std::logic_error("arc with two heads");
                g.arcs[arc].head = i + 1;
            }
        }
        // Regular vertices strictly inside the slab.
        for (Index r = r_lo + 1; r < r_hi; ++r) {
            const Index v = f.order[r];
            const Index w = s.link(v)[0];
            const Index e = *s.find_edge(v, w);
            q.vertex_arc[v] = root_arc[comp.root_of_edge(e)];
        }
        // Area pieces.
        const double c_lo = g.nodes[i].f, c_hi = g.nodes[i + 1].f;
        for (Index kk = q.slab_offset[i]; kk < q.slab_offset[i + 1]; ++kk) {
            const Index t = q.slab_triangles[kk];
            const Triangle& tri = s.triangles()[t];
            const bool flat = f.values[tri[0]] == f.values[tri[1]] && f.values[tri[1]] == f.values[tri[2]];
            if (flat && i != first_slab[t]) continue;
            Index arc = -1;
            for (const auto& oe : s.triangle_edges(t)) {
                const Index root = comp.root_of_edge(oe.edge);
                if (root >= 0 && detail::SlabComponents::meets(s, f, oe.edge, r_lo, r_hi)) {
                    arc = root_arc[root];
                    break;
                }
            }
            q.pieces.push_back({t, arc, c_lo, c_hi});
        }
    }

    for (Index e = 0; e < g.num_arcs(); ++e) {
        if (g.arcs[e].head < 0) throw std::logic_error("arc " + std::to_string(e) + " has no head");
        if (static_cast<Index>(q.seeds[e].size()) != g.arcs[e].head - g.arcs[e].tail)
            throw std::logic_error("arc " + std::to_string(e) + " has gaps in its slab range");
    }
    if (auto p = g.problems(); !p.empty()) throw std::logic_error("Reeb graph invariant violated: " + p.front());
    return out;
}

struct CompatibilityReport {
    int betti1 = 0;
    int genus = 0;
    bool pass = false;
    std::string detail;
};

inline CompatibilityReport check_compatibility(const ReebGraph& g, const TriangulatedSurface& s) {
    CompatibilityReport r;
    r.betti1 = g.betti1();
    r.genus = s.genus();
    r.pass = r.betti1 == r.genus;
    r.detail = r.pass ? "betti1 equals genus"
                      : "betti1 " + std::to_string(r.betti1) + " != genus " + std::to_string(r.genus);
    return r;
}

/// Oriented level cycle: crossings of mesh edges, each between a vertex
/// below the level and one at or above it.
struct LevelCycle {
    std::vector<Index> edges;
    std::vector<Index> below;
    std::vector<Index> above;
    std::vector<double> s;          // fraction from below to above
    std::vector<Index> triangles;   // triangle holding the segment to the next crossing
    std::vector<Point3> points;

    std::size_t size() const { return edges.size(); }
};

/// Level cycle of arc at value t, oriented as the boundary of {F < t}.
inline LevelCycle level_cycle(const TriangulatedSurface& s, const MorseField& f, const ReebResult& reeb, Index arc,
                              double t) {
    const auto& g = reeb.graph;
    const auto& q = reeb.qmap;
    if (arc < 0 || arc >= g.num_arcs()) throw OutOfRange("no arc " + std::to_string(arc));
    const double f_lo = g.nodes[g.arcs[arc].tail].f, f_hi = g.nodes[g.arcs[arc].head].f;
    if (!(t > f_lo && t < f_hi))
        throw OutOfRange("level " + std::to_string(t) + " outside arc range (" + std::to_string(f_lo) + ", " +
                         std::to_string(f_hi) + ")");

    // Vertices of rank < p lie below the level.
    const Index p = static_cast<Index>(
        std::lower_bound(f.order.begin(), f.order.end(), t,
                         [&](Index v, double x) { return f.values[v] < x; }) -
        f.order.begin());
    const Index slab = q.slab_of_rank(p - 1);
    const Index tail = g.arcs[arc].tail;
    if (slab < tail || slab >= g.arcs[arc].head) throw std::logic_error("level outside arc slabs");

    detail::SlabComponents comp(s.num_edges());
    comp.build(s, f, q, slab);
    const Index target = comp.root_of_edge(q.seeds[arc][slab - tail]);
    Index start = -1;
    for (Index l = 0; l < static_cast<Index>(comp.edges.size()) && start < 0; ++l) {
        const auto [lo, hi] = detail::SlabComponents::rank_range(s, f, comp.edges[l]);
        if (lo < p && hi >= p && comp.uf.find(l) == target) start = comp.edges[l];
    }
    if (start < 0) throw std::logic_error("no crossing edge for level cycle");

    auto is_below = [&](Index v) { return f.rank[v] < p; };
    LevelCycle cyc;
    auto push = [&](Index u, Index v) {
        const Index e = *s.find_edge(u, v);
        cyc.edges.push_back(e);
        cyc.below.push_back(u);
        cyc.above.push_back(v);
        const double frac = (t - f.values[u]) / (f.values[v] - f.values[u]);
        cyc.s.push_back(frac);
        if (s.has_positions()) {
            const auto& a = s.positions()[u];
            const auto& b = s.positions()[v];
            cyc.points.push_back({a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]), a[2] + frac * (b[2] - a[2])});
        }
    };

    Index u = s.edges()[start].a, v = s.edges()[start].b;
    if (!is_below(u)) std::swap(u, v);
    const Index u0 = u, v0 = v;
    const Index limit = s.num_edges() + 1;
    do {
        push(u, v);
        const Index tri_id = s.triangle_with_directed_edge(u, v);
        cyc.triangles.push_back(tri_id);
        const Triangle& tri = s.triangles()[tri_id];
        int k = 0;
        while (!(tri[k] == u && tri[(k + 1) % 3] == v)) ++k;
        const Index w = tri[(k + 2) % 3];
        // Exit edge runs above -> below; the neighbour enters it below -> above.
        if (is_below(w)) {
            u = w;  // exit v -> w
        } else {
            v = w;  // exit w -> u
        }
        if (static_cast<Index>(cyc.edges.size()) > limit) throw std::logic_error("level cycle does not close");
    } while (!(u == u0 && v == v0));
    return cyc;
}

/// Graph after cancelling short leaf arcs; members[e] lists the arcs of the
/// input graph merged into arc e.
struct PrunedGraph {
    ReebGraph graph;
    std::vector<std::vector<Index>> members;
    int cancelled = 0;
};

/// Repeatedly cancels the shortest leaf arc whose f-span is below `span`
/// against its saddle, when the saddle is left with one arc below and one
/// above; those two arcs are merged.
inline PrunedGraph prune_leaves(const ReebGraph& g, double span) {
    std::vector<ReebArc> arcs = g.arcs;
    std::vector<std::vector<Index>> members(arcs.size());
    for (Index e = 0; e < g.num_arcs(); ++e) members[e] = {e};
    std::vector<char> arc_alive(arcs.size(), 1), node_alive(g.nodes.size(), 1);
    int cancelled = 0;
    for (;;) {
        std::vector<int> deg(g.nodes.size(), 0), in(g.nodes.size(), 0);
        for (std::size_t e = 0; e < arcs.size(); ++e) {
            if (!arc_alive[e]) continue;
            ++deg[arcs[e].tail];
            ++deg[arcs[e].head];
            ++in[arcs[e].head];
        }
        Index best = -1;
        double best_span = span;
        for (std::size_t e = 0; e < arcs.size(); ++e) {
            if (!arc_alive[e]) continue;
            const auto [t, h] = arcs[e];
            const bool leaf_low = deg[t] == 1 && deg[h] == 3 && in[h] == 2;
            const bool leaf_high = deg[h] == 1 && deg[t] == 3 && in[t] == 1;
            const double d = g.nodes[h].f - g.nodes[t].f;
            if ((leaf_low || leaf_high) && d < best_span) {
                best = static_cast<Index>(e);
                best_span = d;
            }
        }
        if (best < 0) break;
        const auto [t, h] = arcs[best];
        const Index leaf = deg[t] == 1 ? t : h, saddle = leaf == t ? h : t;
        arc_alive[best] = 0;
        node_alive[leaf] = 0;
        node_alive[saddle] = 0;
        Index below = -1, above = -1;
        for (std::size_t e = 0; e < arcs.size(); ++e) {
            if (!arc_alive[e]) continue;
            if (arcs[e].head == saddle) below = static_cast<Index>(e);
            if (arcs[e].tail == saddle) above = static_cast<Index>(e);
        }
        arcs[below].head = arcs[above].head;
        arc_alive[above] = 0;
        auto& m = members[below];
        m.insert(m.end(), members[above].begin(), members[above].end());
        m.insert(m.end(), members[best].begin(), members[best].end());
        ++cancelled;
    }
    PrunedGraph out;
    out.cancelled = cancelled;
    std::vector<Index> renum(g.nodes.size(), -1);
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        if (!node_alive[v]) continue;
        renum[v] = out.graph.num_nodes();
        out.graph.nodes.push_back(g.nodes[v]);
    }
    for (std::size_t e = 0; e < arcs.size(); ++e) {
        if (!arc_alive[e]) continue;
        out.graph.arcs.push_back({renum[arcs[e].tail], renum[arcs[e].head]});
        std::sort(members[e].begin(), members[e].end());
        out.members.push_back(members[e]);
    }
    return out;
}

}  // namespace casimir
