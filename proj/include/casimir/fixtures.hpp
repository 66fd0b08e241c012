#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "casimir/morse.hpp"
#include "casimir/reeb.hpp"
#include "casimir/surface.hpp"

namespace casimir::fixtures {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

namespace detail {

inline Point3 normalized(Point3 p) {
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    return {p[0] / n, p[1] / n, p[2] / n};
}

// Flip faces whose normal points inward (meshes star-shaped about 0).
inline void orient_outward(const std::vector<Point3>& P, std::vector<Triangle>& T) {
    for (auto& t : T) {
        const auto &a = P[t[0]], &b = P[t[1]], &c = P[t[2]];
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
        if (nx * (a[0] + b[0] + c[0]) + ny * (a[1] + b[1] + c[1]) + nz * (a[2] + b[2] + c[2]) < 0)
            std::swap(t[1], t[2]);
    }
}

// Split every face of a polyhedron into m^2 triangles, merging shared
// lattice points, then project to the unit sphere.
inline TriangulatedSurface subdivide_to_sphere(const std::vector<Point3>& P0, const std::vector<Triangle>& T0,
                                               int m) {
    std::map<std::array<long long, 3>, Index> ids;
    std::vector<Point3> P;
    std::vector<Triangle> T;
    auto vertex = [&](const Triangle& f, int i, int j) {
        // Barycentric lattice point (m - i - j, i, j) / m.
        const int k = m - i - j;
        Point3 p{};
        for (int c = 0; c < 3; ++c)
            p[c] = (k * P0[f[0]][c] + i * P0[f[1]][c] + j * P0[f[2]][c]) / m;
        const std::array<long long, 3> key{std::llround(p[0] * 1e9), std::llround(p[1] * 1e9),
                                           std::llround(p[2] * 1e9)};
        auto [it, fresh] = ids.try_emplace(key, static_cast<Index>(P.size()));
        if (fresh) P.push_back(p);
        return it->second;
    };
    for (const auto& f : T0) {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j + i < m; ++j) {
                const Index a = vertex(f, i, j), b = vertex(f, i + 1, j), c = vertex(f, i, j + 1);
                T.push_back({a, b, c});
                if (i + j + 1 < m) {
                    const Index d = vertex(f, i + 1, j + 1);
                    T.push_back({b, d, c});
                }
            }
        }
    }
    for (auto& p : P) p = normalized(p);
    orient_outward(P, T);
    return TriangulatedSurface(std::move(P), std::move(T));
}

}  // namespace detail

inline std::vector<Point3> octahedron_vertices() {
    return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
}

inline std::vector<Triangle> octahedron_triangles() {
    std::vector<Triangle> T{{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                            {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    detail::orient_outward(octahedron_vertices(), T);
    return T;
}

inline TriangulatedSurface octahedron() { return TriangulatedSurface(octahedron_vertices(), octahedron_triangles()); }

/// Octahedron with m segments per edge (8 m^2 triangles) on the unit sphere.
inline TriangulatedSurface octahedral_sphere(int m) {
    return detail::subdivide_to_sphere(octahedron_vertices(), octahedron_triangles(), m);
}

/// Icosahedron with m segments per edge (20 m^2 triangles) on the unit sphere.
inline TriangulatedSurface icosphere(int m) {
    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Point3> P{{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                          {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
    std::vector<Triangle> T{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    detail::orient_outward(P, T);
    return detail::subdivide_to_sphere(P, T, m);
}

/// Vertex index of grid point (i, j) on the n x n periodic grid.
inline Index grid_vertex(int n, int i, int j) { return ((j % n + n) % n) * n + ((i % n + n) % n); }

/// Periodic n x n grid over [0, 2pi)^2, each cell cut along its diagonal,
/// with flat areas h^2 / 2. Positions lie on a torus of revolution.
inline TriangulatedSurface torus_grid(int n) {
    const double h = two_pi / n;
    std::vector<Point3> P(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = i * h, y = j * h;
            P[grid_vertex(n, i, j)] = {(2.0 + std::cos(y)) * std::cos(x), (2.0 + std::cos(y)) * std::sin(x), std::sin(y)};
        }
    }
    std::vector<Triangle> T;
    T.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Index a = grid_vertex(n, i, j), b = grid_vertex(n, i + 1, j);
            const Index c = grid_vertex(n, i + 1, j + 1), d = grid_vertex(n, i, j + 1);
            T.push_back({a, b, c});
            T.push_back({a, c, d});
        }
    }
    std::vector<double> areas(T.size(), 0.5 * h * h);
    return TriangulatedSurface(std::move(P), std::move(T), std::move(areas));
}

/// Samples fn(x, y) at the grid vertices.
inline std::vector<double> sample_grid(int n, const std::function<double(double, double)>& fn) {
    const double h = two_pi / n;
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) v[grid_vertex(n, i, j)] = fn(i * h, j * h);
    return v;
}

/// Grid coordinates (x, y) of a torus_grid vertex.
inline std::pair<double, double> grid_point(int n, Index v) {
    const double h = two_pi / n;
    return {(v % n) * h, (v / n) * h};
}

/// Wraps an angle difference into [-pi, pi).
inline double wrap(double d) {
    d = std::fmod(d + std::numbers::pi, two_pi);
    if (d < 0) d += two_pi;
    return d - std::numbers::pi;
}

/// Torus field with one minimum, three saddles and two maxima.
inline double two_peak_torus(double x, double y) {
    const double dx = wrap(x - 1.6), dy = wrap(y);
    return std::cos(x) + 0.5 * std::cos(y) + 0.7 * std::exp(-(dx * dx + dy * dy) / 0.25);
}

/// Two surfaces with identical triangulation and vorticity field whose area
/// forms differ by moving mass between the two upper branches of the Reeb
/// graph inside the value band [band_lo, band_hi].
struct BranchTransfer {
    TriangulatedSurface before;
    TriangulatedSurface after;
    std::vector<double> field;  // zero lumped mean on both surfaces
    double band_lo = 0.0;
    double band_hi = 0.0;
    double moved = 0.0;  // total area moved
    Index from_arc = -1;
    Index to_arc = -1;
};

inline double two_bump_sphere(const Point3& r) {
    constexpr double th = 0.9;
    auto bump = [&](double sx) {
        const double dx = r[0] - sx * std::sin(th), dy = r[1], dz = r[2] - std::cos(th);
        return std::exp(-(dx * dx + dy * dy + dz * dz) / 0.6);
    };
    return bump(1.0) + bump(-1.0) + 0.2 * r[1];
}

/// Mirror x -> -x keeps two_bump_sphere; moving `fraction` of the area of
/// band triangles on one branch onto their mirror images leaves every total
/// moment unchanged.
inline BranchTransfer branch_transfer_sphere(int m = 8, double fraction = 0.3) {
    TriangulatedSurface base = icosphere(m);
    const auto& P = base.positions();
    const auto& T = base.triangles();
    const Index nv = base.num_vertices();

    std::map<std::array<long long, 3>, Index> at;
    auto key = [](const Point3& p) {
        return std::array<long long, 3>{std::llround(p[0] * 1e8), std::llround(p[1] * 1e8), std::llround(p[2] * 1e8)};
    };
    for (Index v = 0; v < nv; ++v) at[key(P[v])] = v;
    std::vector<Index> mirror(nv);
    for (Index v = 0; v < nv; ++v) mirror[v] = at.at(key({-P[v][0], P[v][1], P[v][2]}));
    std::map<std::array<Index, 3>, Index> tri_at;
    auto sorted = [](std::array<Index, 3> t) {
        std::sort(t.begin(), t.end());
        return t;
    };
    for (Index t = 0; t < base.num_triangles(); ++t) tri_at[sorted(T[t])] = t;

    std::vector<double> F(nv);
    for (Index v = 0; v < nv; ++v) F[v] = two_bump_sphere(P[v]);
    // Separate the two maximum values.
    auto field = classify_vertices(base, F);
    double lo = F[0], hi = F[0];
    for (double x : F) lo = std::min(lo, x), hi = std::max(hi, x);
    for (Index v = 0; v < nv; ++v)
        if (field.classes[v].kind == VertexKind::Max && P[v][0] > 0) F[v] += 0.01 * (hi - lo);
    field = classify_vertices(base, F);
    const auto reeb = build_reeb(base, field);
    const auto& g = reeb.graph;
    if (g.num_nodes() != 4 || g.num_arcs() != 3) throw std::logic_error("two-bump field lost its shape");

    BranchTransfer out{base, base, {}, 0, 0, 0, -1, -1};
    double saddle = 0.0, top = INFINITY;
    for (const auto& n : g.nodes) {
        if (n.kind == VertexKind::Saddle) saddle = n.f;
        if (n.kind == VertexKind::Max) top = std::min(top, n.f);
    }
    for (Index e = 0; e < g.num_arcs(); ++e) {
        const auto& head = g.nodes[g.arcs[e].head];
        if (head.kind != VertexKind::Max) continue;
        (P[head.vertex][0] > 0 ? out.from_arc : out.to_arc) = e;
    }
    out.band_lo = saddle + 0.25 * (top - saddle);
    out.band_hi = saddle + 0.6 * (top - saddle);

    std::vector<Index> arc_of(base.num_triangles(), -1);
    for (const auto& piece : reeb.qmap.pieces) arc_of[piece.triangle] = piece.arc;
    std::vector<double> areas = base.areas();
    for (Index t = 0; t < base.num_triangles(); ++t) {
        if (arc_of[t] != out.from_arc) continue;
        bool inside = true;
        for (Index v : T[t]) inside = inside && F[v] >= out.band_lo && F[v] <= out.band_hi;
        if (!inside) continue;
        const Index u = tri_at.at(sorted({mirror[T[t][0]], mirror[T[t][1]], mirror[T[t][2]]}));
        if (arc_of[u] != out.to_arc) throw std::logic_error("mirror triangle left its branch");
        const double dm = fraction * base.areas()[t];
        areas[t] += dm;
        areas[u] -= dm;
        out.moved += dm;
    }
    out.after = TriangulatedSurface(base.positions(), base.triangles(), std::move(areas));

    const auto w = base.areas();
    double mean = 0.0;
    for (Index t = 0; t < base.num_triangles(); ++t)
        for (Index v : T[t]) mean += w[t] * F[v] / 3.0;
    mean /= base.total_area();
    for (double& x : F) x -= mean;
    out.field = std::move(F);
    return out;
}

}  // namespace casimir::fixtures
