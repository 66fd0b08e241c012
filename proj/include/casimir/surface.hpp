#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "casimir/errors.hpp"

namespace casimir {

using Index = std::int32_t;
using Point3 = std::array<double, 3>;
using Triangle = std::array<Index, 3>;

/// Undirected mesh edge stored with a < b.
struct Edge {
    Index a;
    Index b;
};

/// An edge id together with the sign of the requested orientation relative
/// to the stored (a < b) orientation.
struct OrientedEdge {
    Index edge;
    int sign;
};

/// Closed, connected, consistently oriented triangulated surface with an
/// area weight per triangle. Positions are optional; when areas are not
/// supplied they are derived from positions.
///
/// Construction validates the mesh and throws NonManifoldError,
/// OrientationError or GeometryError. The object is immutable afterwards.
class TriangulatedSurface {
public:
    TriangulatedSurface(std::vector<Point3> positions, std::vector<Triangle> triangles,
                        std::optional<std::vector<double>> areas = std::nullopt)
        : positions_(std::move(positions)), triangles_(std::move(triangles)) {
        num_vertices_ = static_cast<Index>(positions_.size());
        if (areas) {
            areas_ = std::move(*areas);
        }
        build();
    }

    /// Surface given by combinatorics and area weights only.
    static TriangulatedSurface from_combinatorics(Index num_vertices, std::vector<Triangle> triangles,
                                                  std::vector<double> areas) {
        TriangulatedSurface s;
        s.num_vertices_ = num_vertices;
        s.triangles_ = std::move(triangles);
        s.areas_ = std::move(areas);
        s.build();
        return s;
    }

    Index num_vertices() const noexcept { return num_vertices_; }
    Index num_edges() const noexcept { return static_cast<Index>(edges_.size()); }
    Index num_triangles() const noexcept { return static_cast<Index>(triangles_.size()); }

    bool has_positions() const noexcept { return !positions_.empty(); }
    const std::vector<Point3>& positions() const noexcept { return positions_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<double>& areas() const noexcept { return areas_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    double total_area() const noexcept { return total_area_; }

    int euler_characteristic() const noexcept { return num_vertices() - num_edges() + num_triangles(); }
    int genus() const noexcept { return (2 - euler_characteristic()) / 2; }

    /// Edge id and orientation sign of u->v; throws std::out_of_range if
    /// u and v are not adjacent.
    OrientedEdge oriented_edge(Index u, Index v) const {
        auto it = edge_lookup_.find(key(u, v));
        if (it == edge_lookup_.end()) throw std::out_of_range("vertices are not adjacent");
        return {it->second, u < v ? 1 : -1};
    }

    std::optional<Index> find_edge(Index u, Index v) const {
        auto it = edge_lookup_.find(key(u, v));
        if (it == edge_lookup_.end()) return std::nullopt;
        return it->second;
    }

    /// Edges of triangle t in the order (v0v1, v1v2, v2v0), each signed
    /// relative to the counter-clockwise traversal of the triangle.
    const std::array<OrientedEdge, 3>& triangle_edges(Index t) const { return triangle_edges_[t]; }

    /// The two triangles sharing edge e.
    const std::array<Index, 2>& edge_triangles(Index e) const { return edge_triangles_[e]; }

    /// Neighbors of v in counter-clockwise cyclic order.
    std::span<const Index> link(Index v) const {
        return {link_.data() + link_offset_[v], link_.data() + link_offset_[v + 1]};
    }

    /// Triangles incident to v (same cyclic order as link()).
    std::span<const Index> star(Index v) const {
        return {star_.data() + link_offset_[v], star_.data() + link_offset_[v + 1]};
    }

    /// Triangle that traverses u->v counter-clockwise.
    Index triangle_with_directed_edge(Index u, Index v) const {
        const Index e = oriented_edge(u, v).edge;
        for (Index t : edge_triangles_[e]) {
            const Triangle& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                if (tri[k] == u && tri[(k + 1) % 3] == v) return t;
            }
        }
        throw std::logic_error("directed edge not found");
    }

private:
    TriangulatedSurface() = default;

    static std::uint64_t key(Index u, Index v) {
        const auto lo = static_cast<std::uint64_t>(std::min(u, v));
        const auto hi = static_cast<std::uint64_t>(std::max(u, v));
        return (lo << 32) | hi;
    }

    static double triangle_area(const Point3& p, const Point3& q, const Point3& r) {
        const double ax = q[0] - p[0], ay = q[1] - p[1], az = q[2] - p[2];
        const double bx = r[0] - p[0], by = r[1] - p[1], bz = r[2] - p[2];
        const double cx = ay * bz - az * by, cy = az * bx - ax * bz, cz = ax * by - ay * bx;
        return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
    }

    void build() {
        const Index nt = num_triangles();
        if (num_vertices_ <= 0 || nt <= 0) throw NonManifoldError("empty mesh");

        for (Index t = 0; t < nt; ++t) {
            const Triangle& tri = triangles_[t];
            for (Index v : tri) {
                if (v < 0 || v >= num_vertices_)
                    throw NonManifoldError("triangle " + std::to_string(t) + " references vertex out of range");
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0])
                throw NonManifoldError("triangle " + std::to_string(t) + " is degenerate");
        }

        if (areas_.empty()) {
            if (positions_.empty()) throw GeometryError("neither positions nor areas supplied");
            areas_.resize(nt);
            for (Index t = 0; t < nt; ++t) {
                const Triangle& tri = triangles_[t];
                areas_[t] = triangle_area(positions_[tri[0]], positions_[tri[1]], positions_[tri[2]]);
            }
        } else if (static_cast<Index>(areas_.size()) != nt) {
            throw CountMismatch("area count " + std::to_string(areas_.size()) + " != triangle count " +
                                std::to_string(nt));
        }
        total_area_ = 0.0;
        for (Index t = 0; t < nt; ++t) {
            if (!(areas_[t] > 0.0) || !std::isfinite(areas_[t]))
                throw GeometryError("triangle " + std::to_string(t) + " has non-positive area");
            total_area_ += areas_[t];
        }

        // Edges with their incident (triangle, direction) records.
        edge_lookup_.reserve(static_cast<std::size_t>(nt) * 2);
        std::vector<std::array<int, 2>> direction_count;  // [+1 uses, -1 uses]
        triangle_edges_.resize(nt);
        for (Index t = 0; t < nt; ++t) {
            const Triangle& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const Index u = tri[k], v = tri[(k + 1) % 3];
                auto [it, inserted] = edge_lookup_.try_emplace(key(u, v), static_cast<Index>(edges_.size()));
                if (inserted) {
                    edges_.push_back({std::min(u, v), std::max(u, v)});
                    edge_triangles_.push_back({-1, -1});
                    direction_count.push_back({0, 0});
                }
                const Index e = it->second;
                const int sign = u < v ? 1 : -1;
                triangle_edges_[t][k] = {e, sign};
                auto& slots = edge_triangles_[e];
                if (slots[0] < 0) {
                    slots[0] = t;
                } else if (slots[1] < 0) {
                    slots[1] = t;
                } else {
                    throw NonManifoldError("edge (" + std::to_string(edges_[e].a) + "," +
                                           std::to_string(edges_[e].b) + ") has more than two triangles");
                }
                ++direction_count[e][sign > 0 ? 0 : 1];
            }
        }
        for (Index e = 0; e < num_edges(); ++e) {
            if (edge_triangles_[e][1] < 0)
                throw NonManifoldError("boundary edge (" + std::to_string(edges_[e].a) + "," +
                                       std::to_string(edges_[e].b) + ")");
            if (direction_count[e][0] != 1 || direction_count[e][1] != 1)
                throw OrientationError("edge (" + std::to_string(edges_[e].a) + "," +
                                       std::to_string(edges_[e].b) + ") traversed twice in the same direction");
        }

        build_links();
        check_connected();
    }

    void build_links() {
        const Index nv = num_vertices_;
        std::vector<Index> degree(nv, 0);
        for (const Triangle& tri : triangles_)
            for (Index v : tri) ++degree[v];
        link_offset_.assign(nv + 1, 0);
        for (Index v = 0; v < nv; ++v) {
            if (degree[v] == 0) throw NonManifoldError("isolated vertex " + std::to_string(v));
            link_offset_[v + 1] = link_offset_[v] + degree[v];
        }
        // Per vertex: the opposite edge (a -> b) of each incident triangle.
        std::vector<Index> fill(link_offset_.begin(), link_offset_.end() - 1);
        std::vector<Index> from(link_offset_[nv]), to(link_offset_[nv]), tri_of(link_offset_[nv]);
        for (Index t = 0; t < num_triangles(); ++t) {
            const Triangle& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const Index v = tri[k];
                const Index slot = fill[v]++;
                from[slot] = tri[(k + 1) % 3];
                to[slot] = tri[(k + 2) % 3];
                tri_of[slot] = t;
            }
        }
        link_.resize(link_offset_[nv]);
        star_.resize(link_offset_[nv]);
        for (Index v = 0; v < nv; ++v) {
            const Index begin = link_offset_[v], end = link_offset_[v + 1];
            const Index n = end - begin;
            std::unordered_map<Index, Index> next_slot;
            next_slot.reserve(n);
            for (Index s = begin; s < end; ++s) {
                if (!next_slot.emplace(from[s], s).second)
                    throw NonManifoldError("non-manifold vertex " + std::to_string(v));
            }
            Index slot = begin;
            for (Index i = 0; i < n; ++i) {
                link_[begin + i] = from[slot];
                star_[begin + i] = tri_of[slot];
                auto it = next_slot.find(to[slot]);
                if (it == next_slot.end()) throw NonManifoldError("open vertex star at " + std::to_string(v));
                slot = it->second;
                if (slot == begin && i + 1 < n)
                    throw NonManifoldError("non-manifold vertex " + std::to_string(v) + " (pinched star)");
            }
            if (slot != begin) throw NonManifoldError("non-manifold vertex " + std::to_string(v));
        }
    }

    void check_connected() const {
        std::vector<char> seen(num_vertices_, 0);
        std::vector<Index> stack{0};
        seen[0] = 1;
        Index count = 1;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index w : link(v)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        if (count != num_vertices_) throw NonManifoldError("surface is not connected");
    }

    Index num_vertices_ = 0;
    std::vector<Point3> positions_;
    std::vector<Triangle> triangles_;
    std::vector<double> areas_;
    double total_area_ = 0.0;

    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, Index> edge_lookup_;
    std::vector<std::array<OrientedEdge, 3>> triangle_edges_;
    std::vector<std::array<Index, 2>> edge_triangles_;
    std::vector<Index> link_offset_;
    std::vector<Index> link_;
    std::vector<Index> star_;
};

}  // namespace casimir
