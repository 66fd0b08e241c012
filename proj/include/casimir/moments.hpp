#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "casimir/errors.hpp"

namespace casimir {

/// Power moments m_k = integral of x^k against a measure on [lo, hi].
struct MomentSequence {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    /// Moments of the measure pulled back by x = lo + (hi - lo) u, u in [0, 1].
    std::vector<double> rescaled() const {
        const std::size_t n = values.size();
        const double w = hi - lo;
        std::vector<long double> out(n, 0.0L);
        std::vector<long double> binom(n, 0.0L);
        for (std::size_t k = 0; k < n; ++k) {
            // Binomial row k.
            for (std::size_t j = k; j > 0; --j) binom[j] += binom[j - 1];
            binom[0] = 1.0L;
            long double s = 0.0L, p = 1.0L;
            for (std::size_t j = 0; j <= k; ++j) {
                // C(k, j) (-lo)^(k-j) m_j, summed from j = k down.
                const std::size_t jj = k - j;
                s += binom[jj] * p * values[jj];
                p *= -lo;
            }
            out[k] = s / std::pow(static_cast<long double>(w), static_cast<long double>(k));
        }
        return {out.begin(), out.end()};
    }
};

struct HausdorffViolation {
    int order;  // n
    int index;  // k
    double value;
};

struct FeasibilityReport {
    bool feasible = true;
    double min_difference = 0.0;  // smallest (-1)^n Delta^n mu_k seen
    std::vector<HausdorffViolation> violations;
};

/// (-1)^n Delta^n mu_k = sum_j C(n, j) (-1)^j mu_{k+j} on rescaled moments.
inline double hausdorff_difference(const std::vector<double>& mu, int n, int k) {
    long double s = 0.0L, c = 1.0L;
    for (int j = 0; j <= n; ++j) {
        s += ((j & 1) ? -c : c) * mu[k + j];
        c = c * (n - j) / (j + 1);
    }
    return static_cast<double>(s);
}

/// Checks every difference with k + n < N on moments given on [0, 1]. A
/// difference counts as a violation when it is below
/// -(tol_feas m_0 + rounding bound).
inline FeasibilityReport hausdorff_check_unit(const std::vector<double>& mu, double tol_feas = 1e-12) {
    if (mu.size() < 2) throw std::invalid_argument("need at least two moments");
    const int N = static_cast<int>(mu.size());
    FeasibilityReport r;
    r.min_difference = INFINITY;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k + n < N; ++k) {
            const double d = hausdorff_difference(mu, n, k);
            double mag = 0.0, c = 1.0;
            for (int j = 0; j <= n; ++j) {
                mag += c * std::abs(mu[k + j]);
                c = c * (n - j) / (j + 1);
            }
            r.min_difference = std::min(r.min_difference, d);
            if (d < -(tol_feas * std::abs(mu[0]) + 16 * eps * mag)) {
                r.feasible = false;
                r.violations.push_back({n, k, d});
            }
        }
    }
    return r;
}

/// Rescales first. Mapping raw moments of a narrow interval far from 0
/// cancels badly; pass moments computed on [0, 1] to hausdorff_check_unit.
inline FeasibilityReport hausdorff_check(const MomentSequence& ms, double tol_feas = 1e-12) {
    if (ms.size() < 2) throw std::invalid_argument("need at least two moments");
    if (!(ms.hi > ms.lo)) throw std::invalid_argument("moment interval is empty");
    return hausdorff_check_unit(ms.rescaled(), tol_feas);
}

struct StieltjesValue {
    std::complex<double> value;
    double tail_bound = 0.0;  // bound on the omitted series terms
};

/// Truncated series sum_k m_k / lambda^(k+1). L = max(|lo|, |hi|); the tail
/// uses |m_k| <= m_0 L^k.
inline StieltjesValue stieltjes_series(const MomentSequence& ms, std::complex<double> lambda, double margin = 0.01) {
    const double L = std::max(std::abs(ms.lo), std::abs(ms.hi));
    const double r = std::abs(lambda);
    if (!(r > L * (1.0 + margin)))
        throw DivergenceRisk("series diverges for |lambda| = " + std::to_string(r) + " <= " + std::to_string(L * (1 + margin)));
    StieltjesValue out;
    std::complex<double> inv = 1.0 / lambda, p = inv;
    for (double m : ms.values) {
        out.value += m * p;
        p *= inv;
    }
    const double C = ms.values.empty() ? 0.0 : std::abs(ms.values[0]);
    out.tail_bound = C * std::pow(L / r, static_cast<double>(ms.size())) / (r - L);
    return out;
}

/// Integral of w(z) / (lambda - z) over [lo, hi] by adaptive Gauss-Kronrod.
inline std::complex<double> stieltjes_quadrature(const std::function<double(double)>& w, double lo, double hi,
                                                 std::complex<double> lambda, double tol = 1e-12) {
    if (lambda.imag() == 0.0 && lambda.real() >= lo && lambda.real() <= hi)
        throw OutOfRange("lambda lies on the support");
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto part = [&](double a, double b) {
        const double re = GK::integrate([&](double z) { return (w(z) / (lambda - z)).real(); }, a, b, 20, tol);
        const double im = GK::integrate([&](double z) { return (w(z) / (lambda - z)).imag(); }, a, b, 20, tol);
        return std::complex<double>(re, im);
    };
    const double x = lambda.real();
    if (x > lo && x < hi) return part(lo, x) + part(x, hi);
    return part(lo, hi);
}

/// (Phi(x - i eps) - Phi(x + i eps)) / (2 pi i).
template <class Phi>
double jump_density(Phi&& phi, double x, double eps) {
    const std::complex<double> d = phi(std::complex<double>(x, -eps)) - phi(std::complex<double>(x, eps));
    return (d / std::complex<double>(0.0, 2.0 * std::numbers::pi)).real();
}

/// Legendre expansion of a density on [lo, hi] from its moments:
/// w(x) = (1 / half) sum_n a_n P_n(t), t = (x - mid) / half.
struct LegendreDensity {
    double lo = -1.0;
    double hi = 1.0;
    std::vector<double> a;
    int effective_n = 0;  // coefficients kept after the rounding check

    double operator()(double x) const {
        if (x < lo || x > hi) return 0.0;
        const double half = 0.5 * (hi - lo), t = (x - 0.5 * (lo + hi)) / half;
        double p0 = 1.0, p1 = t, s = a.empty() ? 0.0 : a[0];
        if (a.size() > 1) s += a[1] * t;
        for (std::size_t n = 1; n + 1 < a.size(); ++n) {
            const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
            s += a[n + 1] * p2;
            p0 = p1;
            p1 = p2;
        }
        return s / half;
    }
};

/// Coefficients in long double; a coefficient whose rounding bound exceeds
/// tol m_0 ends the expansion.
inline LegendreDensity legendre_from_moments(const MomentSequence& ms, double tol = 1e-8) {
    const int N = static_cast<int>(ms.size());
    const long double mid = 0.5L * (static_cast<long double>(ms.lo) + ms.hi);
    const long double half = 0.5L * (static_cast<long double>(ms.hi) - ms.lo);
    // Moments of t = (x - mid) / half.
    std::vector<long double> M(N, 0.0L), binom(N, 0.0L);
    for (int k = 0; k < N; ++k) {
        for (int j = k; j > 0; --j) binom[j] += binom[j - 1];
        binom[0] = 1.0L;
        long double s = 0.0L, p = 1.0L;
        for (int j = k; j >= 0; --j) {
            s += binom[j] * p * ms.values[j];
            p *= -mid;
        }
        M[k] = s / std::pow(half, static_cast<long double>(k));
    }
    // Monomial coefficients of P_n by the three-term recurrence.
    std::vector<std::vector<long double>> P(N);
    if (N > 0) P[0] = {1.0L};
    if (N > 1) P[1] = {0.0L, 1.0L};
    for (int n = 1; n + 1 < N; ++n) {
        P[n + 1].assign(n + 2, 0.0L);
        for (int j = 0; j <= n; ++j) P[n + 1][j + 1] += (2.0L * n + 1.0L) * P[n][j] / (n + 1.0L);
        for (int j = 0; j < n; ++j) P[n + 1][j] -= n * P[n - 1][j] / (n + 1.0L);
    }
    LegendreDensity d;
    d.lo = ms.lo;
    d.hi = ms.hi;
    const long double ulp = std::numeric_limits<double>::epsilon();
    const long double m0 = std::abs(M.empty() ? 0.0L : M[0]);
    for (int n = 0; n < N; ++n) {
        long double s = 0.0L, mag = 0.0L;
        for (int j = 0; j <= n; ++j) {
            s += P[n][j] * M[j];
            mag += std::abs(P[n][j] * M[j]);
        }
        if (ulp * mag > tol * m0) break;
        d.a.push_back(static_cast<double>((2.0L * n + 1.0L) / 2.0L * s));
    }
    d.effective_n = static_cast<int>(d.a.size());
    return d;
}

struct Reconstruction {
    std::vector<double> grid;
    std::vector<double> w;
    double mass = 0.0;    // grid integral of w
    double defect = 0.0;  // |mass - m_0| / m_0
    int effective_n = 0;
    double eps = 0.0;
};

struct ReconstructOptions {
    double L = 0.0;          // grid half-width; 0 means max(|lo|, |hi|)
    double eps = 0.0;        // 0 means 1e-2 L
    int grid_points = 201;   // interior points of (-L, L)
    double max_defect = 0.2;
};

/// Density by the jump formula applied to the Stieltjes transform of the
/// Legendre expansion of the moments. Throws Infeasible for moments that fail
/// hausdorff_check and IllConditioned when the mass defect exceeds max_defect.
inline Reconstruction reconstruct_density(const MomentSequence& ms, ReconstructOptions opt = {}) {
    const auto feas = hausdorff_check(ms);
    if (!feas.feasible)
        throw Infeasible("moments fail the Hausdorff conditions (" + std::to_string(feas.violations.size()) +
                         " violations)");
    if (opt.L <= 0.0) opt.L = std::max(std::abs(ms.lo), std::abs(ms.hi));
    if (opt.eps <= 0.0) opt.eps = 1e-2 * opt.L;
    if (opt.grid_points < 2) throw std::invalid_argument("grid needs at least two points");
    const auto dens = legendre_from_moments(ms);
    auto phi = [&](std::complex<double> z) {
        return stieltjes_quadrature([&](double x) { return dens(x); }, ms.lo, ms.hi, z, 1e-10);
    };
    Reconstruction r;
    r.eps = opt.eps;
    r.effective_n = dens.effective_n;
    const double h = 2.0 * opt.L / (opt.grid_points + 1);
    for (int j = 1; j <= opt.grid_points; ++j) {
        const double x = -opt.L + j * h;
        r.grid.push_back(x);
        r.w.push_back(jump_density(phi, x, opt.eps));
    }
    for (double v : r.w) r.mass += v * h;
    const double m0 = ms.values[0];
    r.defect = std::abs(r.mass - m0) / std::abs(m0);
    if (r.defect > opt.max_defect)
        throw IllConditioned("reconstructed mass misses m_0 by " + std::to_string(100 * r.defect) + "%",
                             r.effective_n, opt.eps);
    return r;
}

/// Grid points at distance at least `margin` from both ends of [lo, hi].
inline std::vector<std::size_t> interior_points(const Reconstruction& r, double lo, double hi, double margin) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < r.grid.size(); ++j)
        if (r.grid[j] >= lo + margin && r.grid[j] <= hi - margin) out.push_back(j);
    return out;
}

}  // namespace casimir
