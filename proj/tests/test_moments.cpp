#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "casimir/fixtures.hpp"
#include "casimir/measure.hpp"
#include "casimir/moments.hpp"

using namespace casimir;

namespace {

constexpr double pi = std::numbers::pi;

// Moments of the uniform density 1 on [-1, 1].
MomentSequence uniform(int N) {
    MomentSequence ms{-1.0, 1.0, {}};
    for (int k = 0; k < N; ++k) ms.values.push_back(k % 2 ? 0.0 : 2.0 / (k + 1));
    return ms;
}

// Moments of the semicircle density sqrt(1 - x^2) on [-1, 1]: pi/2 C_j / 4^j at k = 2j.
MomentSequence semicircle(int N) {
    MomentSequence ms{-1.0, 1.0, {}};
    double catalan = 1.0;
    for (int k = 0; k < N; ++k) {
        if (k % 2) {
            ms.values.push_back(0.0);
            continue;
        }
        const int j = k / 2;
        ms.values.push_back(pi / 2 * catalan / std::pow(4.0, j));
        catalan = catalan * 2.0 * (2.0 * j + 1.0) / (j + 2.0);
    }
    return ms;
}

}  // namespace

TEST(Hausdorff, UniformIsFeasible) {
    const auto r = hausdorff_check(uniform(32));
    EXPECT_TRUE(r.feasible);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_GE(r.min_difference, -1e-12);
}

TEST(Hausdorff, NormalizedUniformCombination) {
    auto mu = uniform(8).rescaled();
    const double m0 = mu[0];
    for (double& x : mu) x /= m0;
    // On [0, 1] the moments are 1 / (k + 1).
    for (std::size_t k = 0; k < mu.size(); ++k) EXPECT_NEAR(mu[k], 1.0 / (k + 1), 1e-15);
    EXPECT_NEAR(mu[3] - 2 * mu[4] + mu[5], 1.0 / 60.0, 1e-15);
    EXPECT_NEAR(hausdorff_difference(mu, 2, 3), 1.0 / 60.0, 1e-15);
}

TEST(Hausdorff, DiracAtEndpoint) {
    MomentSequence ms{0.0, 1.0, std::vector<double>(20, 3.0)};
    const auto r = hausdorff_check(ms);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.min_difference, 0.0, 1e-12);
}

TEST(Hausdorff, IncreasingMomentsAreInfeasible) {
    MomentSequence ms{0.0, 1.0, {1.0, 2.0}};
    const auto r = hausdorff_check(ms);
    EXPECT_FALSE(r.feasible);
    ASSERT_FALSE(r.violations.empty());
    EXPECT_EQ(r.violations[0].order, 1);
    EXPECT_EQ(r.violations[0].index, 0);
    EXPECT_NEAR(r.violations[0].value, -1.0, 1e-15);
}

TEST(Hausdorff, RejectsBadInput) {
    EXPECT_THROW(hausdorff_check(MomentSequence{0.0, 1.0, {1.0}}), std::invalid_argument);
    EXPECT_THROW(hausdorff_check(MomentSequence{1.0, 1.0, {1.0, 1.0}}), std::invalid_argument);
}

TEST(Hausdorff, EdgeMeasuresAreFeasible) {
    const int n = 48;
    const auto s = fixtures::torus_grid(n);
    const auto f = classify_vertices(s, fixtures::sample_grid(n, fixtures::two_peak_torus));
    const auto g = pushforward_measure(s, f, build_reeb(s, f), 16);
    for (const auto& em : g.edges) {
        const auto r = hausdorff_check_unit(em.mu);
        EXPECT_TRUE(r.feasible) << "arc " << em.arc << " min difference " << r.min_difference;
    }
}

TEST(Stieltjes, SeriesMatchesLogarithm) {
    // Integral over [-1, 1] of 1 / (2 - z) is ln 3.
    const auto v = stieltjes_series(uniform(32), 2.0);
    EXPECT_NEAR(v.value.real(), std::log(3.0), v.tail_bound + 1e-14);
    EXPECT_LT(v.tail_bound, 1e-8);
    EXPECT_EQ(v.value.imag(), 0.0);
}

TEST(Stieltjes, DiracGivesPole) {
    MomentSequence ms{0.0, 1.0, std::vector<double>(40, 1.0)};
    for (double lam : {2.0, 3.5, -4.0}) {
        const auto v = stieltjes_series(ms, lam);
        EXPECT_NEAR(v.value.real(), 1.0 / (lam - 1.0), v.tail_bound + 1e-14);
    }
}

TEST(Stieltjes, DivergenceRiskInsideRadius) {
    EXPECT_THROW(stieltjes_series(uniform(8), 1.005), DivergenceRisk);
    EXPECT_THROW(stieltjes_series(uniform(8), {0.0, 0.5}), DivergenceRisk);
    EXPECT_NO_THROW(stieltjes_series(uniform(8), 1.02));
}

TEST(Stieltjes, SeriesAgreesWithQuadratureOutsideTwiceRadius) {
    const auto ms = semicircle(40);
    auto w = [](double x) { return std::sqrt(std::max(0.0, 1.0 - x * x)); };
    for (std::complex<double> lam : {std::complex<double>(2.5, 0.0), {0.3, 2.2}, {-2.1, -0.7}, {0.0, -3.0}}) {
        const auto s = stieltjes_series(ms, lam);
        const auto q = stieltjes_quadrature(w, -1.0, 1.0, lam);
        EXPECT_LT(std::abs(s.value - q), s.tail_bound + 1e-10) << lam;
    }
    EXPECT_THROW(stieltjes_quadrature(w, -1.0, 1.0, 0.5), OutOfRange);
}

TEST(Jump, ExactTransformConvergesLinearly) {
    // Phi of the uniform density is log((z + 1) / (z - 1)).
    auto phi = [](std::complex<double> z) { return std::log((z + 1.0) / (z - 1.0)); };
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        double err = 0.0;
        for (double x : {-0.5, 0.0, 0.3, 0.7}) err = std::max(err, std::abs(jump_density(phi, x, eps) - 1.0));
        EXPECT_LT(err, 2.0 * eps);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Legendre, ExactForPolynomialDensity) {
    // w(x) = 1 + x on [-1, 1] has moments 2 / (k + 1) for even k and 2 / (k + 2) for odd k.
    MomentSequence ms{-1.0, 1.0, {}};
    for (int k = 0; k < 10; ++k) ms.values.push_back(k % 2 ? 2.0 / (k + 2) : 2.0 / (k + 1));
    const auto d = legendre_from_moments(ms);
    for (double x : {-0.9, -0.2, 0.0, 0.5, 0.99}) EXPECT_NEAR(d(x), 1.0 + x, 1e-12);
    EXPECT_EQ(d(1.5), 0.0);
}

TEST(Reconstruct, UniformInteriorError) {
    const auto r = reconstruct_density(uniform(32), {.eps = 1e-2});
    EXPECT_LT(r.defect, 0.05);
    double err = 0.0;
    for (auto j : interior_points(r, -1.0, 1.0, 10 * r.eps)) err = std::max(err, std::abs(r.w[j] - 1.0));
    EXPECT_LT(err, 0.05);
    EXPECT_GT(r.effective_n, 16);
}

TEST(Reconstruct, SemicircleMass) {
    const auto r = reconstruct_density(semicircle(32), {.eps = 1e-2});
    EXPECT_LT(r.defect, 0.02);
    for (auto j : interior_points(r, -1.0, 1.0, 0.2)) EXPECT_NEAR(r.w[j], std::sqrt(1 - r.grid[j] * r.grid[j]), 0.03);
}

TEST(Reconstruct, ErrorShrinksWithMomentsAndSmoothing) {
    auto l1 = [](int N, double eps) {
        const auto r = reconstruct_density(uniform(N), {.eps = eps});
        double e = 0.0;
        const double h = r.grid[1] - r.grid[0];
        for (auto j : interior_points(r, -1.0, 1.0, 0.2)) e += std::abs(r.w[j] - 1.0) * h;
        return e;
    };
    const double coarse = l1(8, 5e-2), fine = l1(32, 1e-2);
    EXPECT_LT(fine, coarse);
}

TEST(Reconstruct, InfeasibleAndIllConditioned) {
    EXPECT_THROW(reconstruct_density(MomentSequence{0.0, 1.0, {1.0, 2.0, 1.0}}), Infeasible);
    // A grid far wider than the support with heavy smoothing loses mass.
    EXPECT_THROW(reconstruct_density(uniform(16), {.L = 1.0, .eps = 0.5, .grid_points = 21}), IllConditioned);
}
