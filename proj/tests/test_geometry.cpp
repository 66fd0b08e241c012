#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "casimir/fixtures.hpp"
#include "casimir/io.hpp"
#include "casimir/morse.hpp"
#include "casimir/reeb.hpp"

using namespace casimir;

namespace {

std::vector<double> z_field(const TriangulatedSurface& s) {
    std::vector<double> z;
    for (const auto& p : s.positions()) z.push_back(p[2]);
    return z;
}

// Brute force lower-link components, independent of the library routine.
int brute_lower_components(const TriangulatedSurface& s, const std::vector<double>& f, Index v) {
    auto lower = [&](Index w) { return f[w] < f[v] || (f[w] == f[v] && w < v); };
    std::vector<Index> nb;
    for (const auto& t : s.triangles())
        for (int k = 0; k < 3; ++k)
            if (t[k] == v) nb.push_back(t[(k + 1) % 3]), nb.push_back(t[(k + 2) % 3]);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    std::vector<Index> low;
    for (Index w : nb)
        if (lower(w)) low.push_back(w);
    if (low.size() == nb.size()) return -1;
    UnionFind uf(static_cast<Index>(low.size()));
    for (std::size_t i = 0; i < low.size(); ++i)
        for (std::size_t j = i + 1; j < low.size(); ++j)
            if (s.find_edge(low[i], low[j])) uf.unite(static_cast<Index>(i), static_cast<Index>(j));
    int c = 0;
    for (std::size_t i = 0; i < low.size(); ++i) c += uf.find(static_cast<Index>(i)) == static_cast<Index>(i);
    return c;
}

}  // namespace

TEST(Surface, OctahedronCounts) {
    const auto s = fixtures::octahedron();
    EXPECT_EQ(s.num_vertices(), 6);
    EXPECT_EQ(s.num_edges(), 12);
    EXPECT_EQ(s.num_triangles(), 8);
    EXPECT_EQ(s.euler_characteristic(), 2);
    EXPECT_EQ(s.genus(), 0);
}

TEST(Surface, TorusGridIsGenusOne) {
    const auto s = fixtures::torus_grid(16);
    EXPECT_EQ(s.euler_characteristic(), 0);
    EXPECT_EQ(s.genus(), 1);
    EXPECT_NEAR(s.total_area(), fixtures::two_pi * fixtures::two_pi, 1e-9);
}

TEST(Surface, BoundaryEdgeRejected) {
    auto P = fixtures::octahedron_vertices();
    auto T = fixtures::octahedron_triangles();
    T.pop_back();
    EXPECT_THROW(TriangulatedSurface(P, T), NonManifoldError);
}

TEST(Surface, InconsistentOrientationRejected) {
    auto P = fixtures::octahedron_vertices();
    auto T = fixtures::octahedron_triangles();
    std::swap(T[0][1], T[0][2]);
    EXPECT_THROW(TriangulatedSurface(P, T), OrientationError);
}

TEST(Surface, NonPositiveAreaRejected) {
    std::vector<double> areas(8, 1.0);
    areas[3] = 0.0;
    EXPECT_THROW(TriangulatedSurface(fixtures::octahedron_vertices(), fixtures::octahedron_triangles(), areas),
                 GeometryError);
}

TEST(Surface, LinkIsCyclicAndCounterClockwise) {
    const auto s = fixtures::octahedron();
    for (Index v = 0; v < s.num_vertices(); ++v) {
        const auto link = s.link(v);
        ASSERT_EQ(link.size(), 4u);
        for (std::size_t i = 0; i < link.size(); ++i)
            EXPECT_TRUE(s.find_edge(link[i], link[(i + 1) % link.size()]).has_value());
    }
}

TEST(Io, OffRoundTrip) {
    const auto s = fixtures::octahedron();
    std::stringstream ss;
    io::write_off(ss, s);
    const auto mesh = io::read_off(ss);
    EXPECT_EQ(mesh.positions.size(), 6u);
    EXPECT_EQ(mesh.triangles.size(), 8u);
    EXPECT_EQ(mesh.triangles, s.triangles());
}

TEST(Io, MalformedOffRejected) {
    std::stringstream bad("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 x\n3 0 1 2\n");
    EXPECT_THROW(io::read_off(bad), ParseError);
    std::stringstream quad("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 2 3\n");
    EXPECT_THROW(io::read_off(quad), ParseError);
    std::stringstream header("PLY\n");
    EXPECT_THROW(io::read_off(header), ParseError);
}

TEST(Io, FieldCountMismatch) {
    const auto s = fixtures::octahedron();
    EXPECT_THROW(classify_vertices(s, {1, 2, 3}), CountMismatch);
}

TEST(Morse, OctahedronHeight) {
    const auto s = fixtures::octahedron();
    const auto f = classify_vertices(s, z_field(s));
    const auto c = count_critical(f);
    EXPECT_EQ(c.minima, 1);
    EXPECT_EQ(c.maxima, 1);
    EXPECT_EQ(c.saddles, 0);
    EXPECT_EQ(f.classes[5].kind, VertexKind::Min);
    EXPECT_EQ(f.classes[4].kind, VertexKind::Max);
    const auto cert = certify_simple(f, s);
    EXPECT_TRUE(cert.simple());
    EXPECT_EQ(cert.critical.size(), 2u);
}

TEST(Morse, TorusCosineCount) {
    const int n = 32;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(x) + 0.5 * std::cos(y); }));
    const auto c = count_critical(f);
    EXPECT_EQ(c.minima, 1);
    EXPECT_EQ(c.maxima, 1);
    EXPECT_EQ(c.saddles, 2);
    EXPECT_EQ(c.saddle_multiplicity, 2);
    for (Index v = 0; v < s.num_vertices(); ++v) {
        const int b = brute_lower_components(s, f.values, v);
        const auto k = f.classes[v].kind;
        if (b == -1) EXPECT_EQ(k, VertexKind::Max);
        else if (b == 0) EXPECT_EQ(k, VertexKind::Min);
        else if (b == 1) EXPECT_EQ(k, VertexKind::Regular);
        else EXPECT_EQ(f.classes[v].multiplicity, b - 1);
    }
}

TEST(Morse, MonkeySaddleHasMultiplicityTwo) {
    // Hexagonal fan around vertex 0 with three lower lobes, capped below.
    std::vector<Point3> P{{0, 0, 0}};
    for (int k = 0; k < 6; ++k) P.push_back({std::cos(k * M_PI / 3), std::sin(k * M_PI / 3), 0});
    P.push_back({0, 0, -1});
    std::vector<Triangle> T;
    for (int k = 0; k < 6; ++k) {
        T.push_back({0, static_cast<Index>(1 + k), static_cast<Index>(1 + (k + 1) % 6)});
        T.push_back({7, static_cast<Index>(1 + (k + 1) % 6), static_cast<Index>(1 + k)});
    }
    const TriangulatedSurface s(P, T);
    std::vector<double> f{0, -1, 1, -1, 1, -1, 1, -5};
    const auto mf = classify_vertices(s, f);
    EXPECT_EQ(mf.classes[0].kind, VertexKind::Saddle);
    EXPECT_EQ(mf.classes[0].multiplicity, 2);
    const auto cert = certify_simple(mf, s);
    ASSERT_FALSE(cert.simple());
    EXPECT_EQ(cert.violations.front().kind, ViolationKind::DegenerateSaddle);
    EXPECT_THROW(perturb_to_simple(mf, s), PerturbFailure);
}

TEST(Morse, PoincareHopfOnRandomFields) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto sphere = fixtures::octahedral_sphere(6);
    const auto torus = fixtures::torus_grid(12);
    for (int trial = 0; trial < 20; ++trial) {
        for (const auto* s : {&sphere, &torus}) {
            std::vector<double> f(s->num_vertices());
            for (auto& x : f) x = u(rng);
            const auto c = count_critical(classify_vertices(*s, f));
            EXPECT_EQ(c.minima + c.maxima - c.saddle_multiplicity, s->euler_characteristic());
        }
    }
}

TEST(Morse, SharedCriticalValueDetected) {
    const int n = 16;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(x) + std::cos(y); }));
    const auto cert = certify_simple(f, s);
    ASSERT_FALSE(cert.simple());
    bool shared = false;
    for (const auto& v : cert.violations) shared |= v.kind == ViolationKind::SharedCriticalValue;
    EXPECT_TRUE(shared);
}

TEST(Morse, NonDistinctValuesOnSeparateComponents) {
    // Two separate maxima at equal height.
    const int n = 24;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(2 * x) + 0.3 * std::cos(y); }));
    const auto cert = certify_simple(f, s);
    ASSERT_FALSE(cert.simple());
    bool distinct = false;
    for (const auto& v : cert.violations) distinct |= v.kind == ViolationKind::NonDistinctValues;
    EXPECT_TRUE(distinct);
}

TEST(Morse, PerturbSeparatesTies) {
    const auto s = fixtures::octahedron();
    const auto f = classify_vertices(s, {0, 0, 0, 0, 1, -1});
    const auto p = perturb_to_simple(f, s);
    for (std::size_t i = 1; i < p.order.size(); ++i) EXPECT_LT(p.values[p.order[i - 1]], p.values[p.order[i]]);
    EXPECT_EQ(p.order, f.order);
    for (Index v = 0; v < 6; ++v) EXPECT_LE(std::abs(p.values[v] - f.values[v]), 2e-9);
    EXPECT_TRUE(certify_simple(p, s).simple());
}

TEST(Morse, PerturbLeavesDistinctFieldAlone) {
    const auto s = fixtures::octahedron();
    const auto f = classify_vertices(s, z_field(s));
    const auto g = classify_vertices(s, {0.1, 0.2, 0.3, 0.4, 1, -1});
    EXPECT_EQ(perturb_to_simple(g, s).values, g.values);
    (void)f;
}

TEST(Morse, RelabelingEquivariance) {
    const int n = 20;
    const auto s = fixtures::torus_grid(n);
    const auto vals = fixtures::sample_grid(n, fixtures::two_peak_torus);
    const auto f = classify_vertices(s, vals);
    std::vector<Index> perm(s.num_vertices());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
    std::vector<Triangle> T;
    for (auto t : s.triangles()) T.push_back({perm[t[0]], perm[t[1]], perm[t[2]]});
    std::vector<double> v2(vals.size());
    for (Index v = 0; v < s.num_vertices(); ++v) v2[perm[v]] = vals[v];
    const auto s2 = TriangulatedSurface::from_combinatorics(s.num_vertices(), T, s.areas());
    const auto f2 = classify_vertices(s2, v2);
    for (Index v = 0; v < s.num_vertices(); ++v) EXPECT_EQ(f.classes[v].kind, f2.classes[perm[v]].kind);
}

TEST(Reeb, OctahedronSingleArc) {
    const auto s = fixtures::octahedron();
    const auto f = classify_vertices(s, z_field(s));
    const auto r = build_reeb(s, f);
    EXPECT_EQ(r.graph.num_nodes(), 2);
    EXPECT_EQ(r.graph.num_arcs(), 1);
    EXPECT_EQ(r.graph.betti1(), 0);
    EXPECT_TRUE(check_compatibility(r.graph, s).pass);
}

TEST(Reeb, TorusCosine) {
    const int n = 32;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(x) + 0.5 * std::cos(y); }));
    const auto r = build_reeb(s, f);
    EXPECT_EQ(r.graph.num_nodes(), 4);
    EXPECT_EQ(r.graph.num_arcs(), 4);
    EXPECT_EQ(r.graph.betti1(), 1);
    EXPECT_TRUE(r.graph.problems().empty());
}

TEST(Reeb, TwoPeakTorus) {
    const int n = 64;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(s, fixtures::sample_grid(n, fixtures::two_peak_torus));
    const auto c = count_critical(f);
    EXPECT_EQ(c.minima, 1);
    EXPECT_EQ(c.maxima, 2);
    EXPECT_EQ(c.saddles, 3);
    const auto r = build_reeb(s, f);
    EXPECT_EQ(r.graph.num_nodes(), 6);
    EXPECT_EQ(r.graph.num_arcs(), 6);
    EXPECT_EQ(r.graph.betti1(), 1);
    EXPECT_TRUE(check_compatibility(r.graph, s).pass);
}

TEST(Reeb, CorruptedGraphFailsCompatibility) {
    const auto s = fixtures::torus_grid(8);
    ReebGraph g;
    g.nodes = {{0, VertexKind::Min}, {1, VertexKind::Saddle}, {2, VertexKind::Saddle}, {3, VertexKind::Max}};
    g.arcs = {{0, 1}, {1, 2}, {1, 2}, {1, 2}, {2, 3}};
    const auto rep = check_compatibility(g, s);
    EXPECT_EQ(rep.betti1, 2);
    EXPECT_FALSE(rep.pass);
    EXPECT_NE(rep.detail.find("betti1 2"), std::string::npos);
}

TEST(Reeb, NotSimpleRejected) {
    const auto s = fixtures::torus_grid(16);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(16, [](double x, double y) { return std::cos(x) + std::cos(y); }));
    EXPECT_THROW(build_reeb(s, f), NotSimple);
}

TEST(Reeb, EquatorCycle) {
    const auto s = fixtures::octahedron();
    const auto f = classify_vertices(s, z_field(s));
    const auto r = build_reeb(s, f);
    const auto cyc = level_cycle(s, f, r, 0, 0.0);
    ASSERT_EQ(cyc.size(), 4u);
    // With outward normals the southern cap's boundary runs clockwise seen from above.
    double turn = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& p = cyc.points[i];
        const auto& q = cyc.points[(i + 1) % 4];
        turn += p[0] * q[1] - p[1] * q[0];
    }
    EXPECT_LT(turn, 0.0);
    EXPECT_THROW(level_cycle(s, f, r, 0, 1.5), OutOfRange);
}

TEST(Reeb, ReversedFieldReversesCycle) {
    const auto s = fixtures::octahedral_sphere(4);
    auto z = z_field(s);
    const auto f = classify_vertices(s, z);
    for (auto& v : z) v = -v;
    const auto g = classify_vertices(s, z);
    const auto c1 = level_cycle(s, f, build_reeb(s, f), 0, 0.3);
    const auto c2 = level_cycle(s, g, build_reeb(s, g), 0, -0.3);
    auto area = [](const LevelCycle& c) {
        double a = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto& p = c.points[i];
            const auto& q = c.points[(i + 1) % c.size()];
            a += p[0] * q[1] - p[1] * q[0];
        }
        return a;
    };
    EXPECT_LT(area(c1), 0.0);
    EXPECT_GT(area(c2), 0.0);
}

TEST(Reeb, RandomLevelsGiveOneClosedCycle) {
    const int n = 48;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(s, fixtures::sample_grid(n, fixtures::two_peak_torus));
    const auto r = build_reeb(s, f);
    std::mt19937 rng(11);
    for (Index e = 0; e < r.graph.num_arcs(); ++e) {
        const double lo = r.graph.nodes[r.graph.arcs[e].tail].f, hi = r.graph.nodes[r.graph.arcs[e].head].f;
        std::uniform_real_distribution<double> u(lo, hi);
        // Count crossing edges of this arc's component: cycle must use each once.
        for (int k = 0; k < 100; ++k) {
            double t = u(rng);
            if (t <= lo || t >= hi) continue;
            const auto cyc = level_cycle(s, f, r, e, t);
            EXPECT_GE(cyc.size(), 3u);
            std::vector<Index> edges = cyc.edges;
            std::sort(edges.begin(), edges.end());
            EXPECT_EQ(std::adjacent_find(edges.begin(), edges.end()), edges.end());
            for (std::size_t i = 0; i < cyc.size(); ++i) {
                // Consecutive crossings share the recorded triangle.
                const auto& tri = s.triangles()[cyc.triangles[i]];
                const auto nx = cyc.edges[(i + 1) % cyc.size()];
                bool found = false;
                for (const auto& oe : s.triangle_edges(cyc.triangles[i])) found |= oe.edge == nx;
                EXPECT_TRUE(found);
                (void)tri;
            }
        }
    }
}

TEST(Reeb, GenusCycleWindsOnce) {
    // cos(y) + 0.5 cos(x): level cycles between the saddles wind once in x.
    const int n = 32;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(y) + 0.5 * std::cos(x); }));
    const auto r = build_reeb(s, f);
    const auto in = r.graph.in_arcs();
    int winding_arcs = 0;
    for (Index e = 0; e < r.graph.num_arcs(); ++e) {
        const auto& a = r.graph.arcs[e];
        if (r.graph.nodes[a.tail].kind != VertexKind::Saddle || r.graph.nodes[a.head].kind != VertexKind::Saddle)
            continue;
        const double t = 0.5 * (r.graph.nodes[a.tail].f + r.graph.nodes[a.head].f);
        const auto cyc = level_cycle(s, f, r, e, t);
        double wx = 0.0, wy = 0.0;
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            auto pt = [&](std::size_t k) {
                const auto [x0, y0] = fixtures::grid_point(n, cyc.below[k]);
                const auto [x1, y1] = fixtures::grid_point(n, cyc.above[k]);
                const double sx = fixtures::wrap(x1 - x0), sy = fixtures::wrap(y1 - y0);
                return std::pair{x0 + cyc.s[k] * sx, y0 + cyc.s[k] * sy};
            };
            const auto [ax, ay] = pt(i);
            const auto [bx, by] = pt((i + 1) % cyc.size());
            wx += fixtures::wrap(bx - ax);
            wy += fixtures::wrap(by - ay);
        }
        EXPECT_NEAR(std::abs(wx) / fixtures::two_pi, 1.0, 1e-9);
        EXPECT_NEAR(wy / fixtures::two_pi, 0.0, 1e-9);
        ++winding_arcs;
    }
    EXPECT_EQ(winding_arcs, 2);
    (void)in;
}

TEST(Reeb, RelabelingGivesSameShape) {
    const int n = 40;
    const auto s = fixtures::torus_grid(n);
    const auto vals = fixtures::sample_grid(n, fixtures::two_peak_torus);
    const auto r1 = build_reeb(s, classify_vertices(s, vals));
    std::vector<Index> perm(s.num_vertices());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
    std::vector<Triangle> T;
    for (auto t : s.triangles()) T.push_back({perm[t[0]], perm[t[1]], perm[t[2]]});
    std::vector<double> v2(vals.size());
    for (Index v = 0; v < s.num_vertices(); ++v) v2[perm[v]] = vals[v];
    const auto s2 = TriangulatedSurface::from_combinatorics(s.num_vertices(), T, s.areas());
    const auto r2 = build_reeb(s2, classify_vertices(s2, v2));
    ASSERT_EQ(r1.graph.num_nodes(), r2.graph.num_nodes());
    ASSERT_EQ(r1.graph.num_arcs(), r2.graph.num_arcs());
    // Nodes are ordered by value; arcs compare as sorted endpoint pairs.
    auto pairs = [](const ReebGraph& g) {
        std::vector<std::pair<Index, Index>> p;
        for (const auto& a : g.arcs) p.push_back({a.tail, a.head});
        std::sort(p.begin(), p.end());
        return p;
    };
    EXPECT_EQ(pairs(r1.graph), pairs(r2.graph));
    for (Index i = 0; i < r1.graph.num_nodes(); ++i) EXPECT_EQ(perm[r1.graph.nodes[i].vertex], r2.graph.nodes[i].vertex);
}
