#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "casimir/fixtures.hpp"
#include "casimir/measure.hpp"

using namespace casimir;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> z_field(const TriangulatedSurface& s) {
    std::vector<double> z;
    for (const auto& p : s.positions()) z.push_back(p[2]);
    return z;
}

struct Pipeline {
    TriangulatedSurface s;
    MorseField f;
    ReebResult r;
    MeasuredReebGraph g;
};

Pipeline sphere(int m) {
    auto s = fixtures::octahedral_sphere(m);
    auto f = classify_vertices(s, z_field(s));
    auto r = build_reeb(s, f);
    auto g = pushforward_measure(s, f, r);
    return {std::move(s), std::move(f), std::move(r), std::move(g)};
}

Pipeline two_peak(int n) {
    auto s = fixtures::torus_grid(n);
    auto f = classify_vertices(s, fixtures::sample_grid(n, fixtures::two_peak_torus));
    auto r = build_reeb(s, f);
    auto g = pushforward_measure(s, f, r);
    return {std::move(s), std::move(f), std::move(r), std::move(g)};
}

}  // namespace

TEST(Quadrature, GaussLegendreExactness) {
    for (int n = 1; n <= 12; ++n) {
        const auto& rule = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double got = rule.integrate([k](double x) { return std::pow(x, k); }, 0.0, 1.0);
            EXPECT_NEAR(got, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
        }
    }
}

TEST(HatPiece, CdfMatchesNumericalIntegral) {
    const HatPiece h{0.2, 0.5, 1.3, 2.0, 0.0, 2.0};
    const auto& rule = gauss_legendre(2);
    for (double t : {0.1, 0.3, 0.5, 0.9, 1.3, 1.5}) {
        const double direct = h.integrate_upto([](double) { return 1.0; }, t, rule);
        EXPECT_NEAR(h.cdf(t), direct, 1e-14);
    }
    EXPECT_DOUBLE_EQ(h.cdf(2.0), 2.0);
}

TEST(HatPiece, TriangleMomentsMatchClosedForm) {
    // Integral of F^2 over a triangle with linear F equals
    // A/6 (a^2 + b^2 + c^2 + ab + bc + ca).
    const double a = -0.3, b = 0.4, c = 1.1, area = 0.7;
    const HatPiece h{a, b, c, area, a, c};
    const auto mp = edge_moments({h}, a, c, 3);
    EXPECT_NEAR(mp.raw[0], area, 1e-15);
    EXPECT_NEAR(mp.raw[1], area * (a + b + c) / 3.0, 1e-15);
    EXPECT_NEAR(mp.raw[2], area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a), 1e-15);
}

TEST(Measure, ConstantValueGivesPowerMoments) {
    const double c = 1.7;
    std::vector<HatPiece> pieces{{c, c, c, 0.3, c, c}, {c, c, c, 0.5, c, c}};
    const auto mp = edge_moments(pieces, 0.0, 2.0, 6);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(mp.raw[i], std::pow(c, i) * 0.8, 1e-12);
}

TEST(Measure, SphereArchimedes) {
    const auto p = sphere(30);
    ASSERT_EQ(p.g.edges.size(), 1u);
    const auto& em = p.g.edges[0];
    const double dt = em.level(1) - em.level(0);
    // Density from the cumulative profile away from the poles.
    for (std::size_t j = 8; j + 8 < em.A.size(); ++j) {
        const double dens = (em.A[j + 1] - em.A[j]) / dt;
        EXPECT_NEAR(dens / (2 * pi), 1.0, 0.02);
    }
    for (std::size_t j = 0; j < em.A.size(); ++j) EXPECT_NEAR(em.A[j], 2 * pi * (em.level(j) + 1), 0.05);
}

TEST(Measure, SphereMoments) {
    const auto p = sphere(30);
    const auto& m = p.g.edges[0].m;
    EXPECT_NEAR(m[0] / (4 * pi), 1.0, 0.01);
    EXPECT_NEAR(m[1], 0.0, 1e-10);
    EXPECT_NEAR(m[2] / (4 * pi / 3), 1.0, 0.01);
    EXPECT_NEAR(m[4] / (4 * pi / 5), 1.0, 0.02);
}

TEST(Measure, VolumeConditionExact) {
    for (const auto& p : {sphere(12), two_peak(48)}) {
        EXPECT_LT(volume_defect(p.g, p.s), 1e-12);
        for (const auto& em : p.g.edges) {
            EXPECT_GT(em.mass(), 0.0);
            EXPECT_EQ(em.A.front(), 0.0);
            for (std::size_t j = 1; j < em.A.size(); ++j) EXPECT_GE(em.A[j], em.A[j - 1] - 1e-15);
        }
    }
}

TEST(Measure, TwoPeakHasSixEdges) {
    const auto p = two_peak(64);
    EXPECT_EQ(p.g.edges.size(), 6u);
}

TEST(Measure, MonteCarloOracle) {
    // Uniform points on the mesh; each point is assigned to an arc through
    // the slab piece of its triangle that contains its value.
    const auto p = two_peak(32);
    const int samples = 1000000;
    std::vector<std::vector<Index>> pieces_of(p.s.num_triangles());
    for (std::size_t k = 0; k < p.r.qmap.pieces.size(); ++k)
        pieces_of[p.r.qmap.pieces[k].triangle].push_back(static_cast<Index>(k));
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<Index> pick(0, p.s.num_triangles() - 1);  // equal areas
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int nm = 4;
    const Index na = p.g.graph.num_arcs();
    std::vector<std::vector<double>> sum(na, std::vector<double>(nm, 0.0)), sq(na, std::vector<double>(nm, 0.0));
    for (int k = 0; k < samples; ++k) {
        const Index t = pick(rng);
        double r1 = u(rng), r2 = u(rng);
        if (r1 + r2 > 1) r1 = 1 - r1, r2 = 1 - r2;
        const auto& tri = p.s.triangles()[t];
        const double F = (1 - r1 - r2) * p.f.values[tri[0]] + r1 * p.f.values[tri[1]] + r2 * p.f.values[tri[2]];
        Index arc = -1;
        for (Index pi_ : pieces_of[t]) {
            const auto& pc = p.r.qmap.pieces[pi_];
            if (F >= pc.lo && F <= pc.hi) arc = pc.arc;
        }
        ASSERT_GE(arc, 0);
        double pw = 1.0;
        for (int i = 0; i < nm; ++i) {
            sum[arc][i] += pw;
            sq[arc][i] += pw * pw;
            pw *= F;
        }
    }
    const double area = p.s.total_area();
    for (Index e = 0; e < na; ++e) {
        for (int i = 0; i < nm; ++i) {
            const double mean = sum[e][i] / samples;
            const double var = sq[e][i] / samples - mean * mean;
            const double est = area * mean;
            const double sigma = area * std::sqrt(var / samples);
            EXPECT_NEAR(p.g.edges[e].m[i], est, 3 * sigma + 1e-12) << "arc " << e << " moment " << i;
        }
    }
}

TEST(Measure, ProfileDifferencingConverges) {
    auto s = fixtures::torus_grid(48);
    auto f = classify_vertices(s, fixtures::sample_grid(48, fixtures::two_peak_torus));
    auto r = build_reeb(s, f);
    const auto g1 = pushforward_measure(s, f, r, 4, 64);
    const auto g2 = pushforward_measure(s, f, r, 4, 256);
    for (std::size_t e = 0; e < g1.edges.size(); ++e) {
        const auto d1 = moments_from_profile(g1.edges[e], 4);
        const auto d2 = moments_from_profile(g2.edges[e], 4);
        const double scale = g1.edges[e].m[0] * std::pow(std::max(std::abs(g1.edges[e].f_lo), std::abs(g1.edges[e].f_hi)), 2);
        const double err1 = std::abs(d1[2] - g1.edges[e].m[2]) / scale;
        const double err2 = std::abs(d2[2] - g2.edges[e].m[2]) / scale;
        EXPECT_LT(err2, 2e-3);
        EXPECT_LE(err2, err1 + 1e-12);
    }
}

TEST(Measure, RescaledMomentsAreHausdorffOrdered) {
    const auto p = two_peak(32);
    for (const auto& em : p.g.edges) {
        EXPECT_NEAR(em.mu[0], em.m[0], 1e-12 * em.m[0]);
        for (std::size_t i = 1; i < em.mu.size(); ++i) EXPECT_LE(em.mu[i], em.mu[i - 1] * (1 + 1e-12));
    }
}

TEST(LogSingularity, QuadraticSaddleRatios) {
    const int n = 128;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(n, [](double x, double y) { return std::cos(x) + 0.5 * std::cos(y); }));
    const auto r = build_reeb(s, f);
    const auto am = build_arc_measures(s, f, r);
    int saddles = 0;
    for (Index v = 0; v < r.graph.num_nodes(); ++v) {
        if (r.graph.nodes[v].kind != VertexKind::Saddle) continue;
        ++saddles;
        const auto rep = log_singularity_diagnostic(am, r.graph, v);
        EXPECT_TRUE(rep.pattern_ok);
        for (double ratio : rep.ratios) EXPECT_NEAR(ratio, -0.5, 0.05);
        EXPECT_LT(rep.residual, 0.05);
        // Symmetric saddle: both branches carry the same fit.
        EXPECT_NEAR(rep.fits[1].p, rep.fits[2].p, 1e-6);
        EXPECT_NEAR(rep.fits[1].k, rep.fits[2].k, 1e-6 * std::abs(rep.fits[1].k));
        // Smooth parts cancel at the vertex.
        EXPECT_NEAR(rep.fits[0].p + rep.fits[1].p + rep.fits[2].p, 0.0, 1e-3);
        // Slope at the saddle of cos x + cos(y)/2 is 1 / (2 sqrt(1/2 * 1/4)) = sqrt 2.
        EXPECT_NEAR(std::abs(rep.psi1), std::sqrt(2.0), 0.05);
    }
    EXPECT_EQ(saddles, 2);
}

TEST(LogSingularity, RejectsExtremum) {
    const auto s = fixtures::torus_grid(32);
    const auto f = classify_vertices(
        s, fixtures::sample_grid(32, [](double x, double y) { return std::cos(x) + 0.5 * std::cos(y); }));
    const auto r = build_reeb(s, f);
    const auto am = build_arc_measures(s, f, r);
    EXPECT_THROW(log_singularity_diagnostic(am, r.graph, 0), InsufficientSamples);
}
