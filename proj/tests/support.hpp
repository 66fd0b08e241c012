#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "casimir/circulation.hpp"
#include "casimir/fixtures.hpp"

namespace casimir::testing {

inline std::vector<double> centered(const TriangulatedSurface& s, std::vector<double> F) {
    const double m = lumped_mean(s, F);
    for (double& x : F) x -= m;
    return F;
}

// Constant form cx dx + cy dy on the grid.
inline DiscreteOneForm constant_form(const TriangulatedSurface& s, int n, double cx, double cy) {
    std::vector<double> v(s.num_edges());
    for (Index e = 0; e < s.num_edges(); ++e) {
        const auto [xa, ya] = fixtures::grid_point(n, s.edges()[e].a);
        const auto [xb, yb] = fixtures::grid_point(n, s.edges()[e].b);
        v[e] = cx * fixtures::wrap(xb - xa) + cy * fixtures::wrap(yb - ya);
    }
    return DiscreteOneForm(std::move(v));
}

struct Pushforward {
    TriangulatedSurface surface;
    std::vector<double> field;
};

// Image of torus_grid(n) and F under the lattice map
// (i, j) -> (i + k j + a, j + b), or (i + a, j + k i + b) when `vertical`,
// with vertices relabelled by a random permutation.
inline Pushforward shear_pushforward(int n, const std::vector<double>& F, int k, int a, int b, bool vertical,
                                     std::mt19937_64& rng) {
    const auto base = fixtures::torus_grid(n);
    std::vector<Index> perm(static_cast<std::size_t>(n) * n);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    auto phi = [&](Index v) {
        const int i = static_cast<int>(v % n), j = static_cast<int>(v / n);
        return perm[vertical ? fixtures::grid_vertex(n, i + a, j + k * i + b) : fixtures::grid_vertex(n, i + k * j + a, j + b)];
    };
    std::vector<Triangle> T;
    for (const auto& t : base.triangles()) T.push_back({phi(t[0]), phi(t[1]), phi(t[2])});
    std::vector<double> G(F.size());
    for (Index v = 0; v < base.num_vertices(); ++v) G[phi(v)] = F[v];
    return {TriangulatedSurface::from_combinatorics(base.num_vertices(), std::move(T), base.areas()), std::move(G)};
}

}  // namespace casimir::testing
