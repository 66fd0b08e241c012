#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "casimir/errors.hpp"
#include "casimir/morse.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/reeb.hpp"
#include "casimir/surface.hpp"

namespace casimir {

/// Image of a linear function on one triangle: `mass` spread with the hat
/// density on [a, c] peaking at b, restricted to values in [lo, hi].
/// a == c is a point mass at a.
struct HatPiece {
    double a, b, c;
    double mass;
    double lo, hi;

    bool point_mass() const { return a == c; }

    /// Unrestricted mass below t.
    double hat_cdf(double t) const {
        if (t <= a) return 0.0;
        if (t >= c) return mass;
        const double w = c - a;
        if (t <= b) return mass * (t - a) * (t - a) / (w * (b - a));
        return mass - mass * (c - t) * (c - t) / (w * (c - b));
    }

    double density(double t) const {
        if (t < a || t > c) return 0.0;
        const double w = c - a;
        if (t < b) return 2.0 * mass * (t - a) / (w * (b - a));
        if (t > b) return 2.0 * mass * (c - t) / (w * (c - b));
        return 2.0 * mass / w;
    }

    /// Mass of the restricted piece below t.
    double cdf(double t) const {
        if (point_mass()) return t >= a ? mass : 0.0;
        const double x = std::clamp(t, lo, hi);
        return hat_cdf(x) - hat_cdf(lo);
    }

    /// Integral of g(f) against the restricted piece over f <= t, exact for
    /// polynomials g of degree <= 2n - 2 with an n-point rule.
    template <class G>
    double integrate_upto(G&& g, double t, const GaussLegendre<double>& rule) const {
        if (point_mass()) return t >= a ? mass * g(a) : 0.0;
        const double top = std::min(t, hi);
        double sum = 0.0;
        const double x0 = std::max(lo, a), x1 = std::min(top, b);
        if (x1 > x0) sum += rule.integrate([&](double x) { return g(x) * density(x); }, x0, x1);
        const double y0 = std::max(lo, b), y1 = std::min(top, c);
        if (y1 > y0) sum += rule.integrate([&](double x) { return g(x) * density(x); }, y0, y1);
        return sum;
    }
};

/// Per-arc hat pieces of a pushforward measure.
struct ArcMeasures {
    std::vector<std::vector<HatPiece>> arcs;

    double total(Index arc) const {
        double s = 0.0;
        for (const auto& p : arcs[arc]) s += p.cdf(p.hi);
        return s;
    }

    double cdf(Index arc, double t) const {
        double s = 0.0;
        for (const auto& p : arcs[arc]) s += p.cdf(t);
        return s;
    }

    /// Integral of f^k over {f <= t} on the arc.
    double moment_upto(Index arc, double t, int k) const {
        const auto& rule = gauss_legendre(k / 2 + 1);
        double s = 0.0;
        for (const auto& p : arcs[arc]) s += p.integrate_upto([k](double x) { return std::pow(x, k); }, t, rule);
        return s;
    }
};

/// Pushforward of per-triangle masses (the areas when `mass` is null).
inline ArcMeasures build_arc_measures(const TriangulatedSurface& s, const MorseField& f, const ReebResult& reeb,
                                      const std::vector<double>* mass = nullptr) {
    const auto& weights = mass ? *mass : s.areas();
    ArcMeasures out;
    out.arcs.resize(reeb.graph.arcs.size());
    for (const auto& piece : reeb.qmap.pieces) {
        const Triangle& tri = s.triangles()[piece.triangle];
        double v[3] = {f.values[tri[0]], f.values[tri[1]], f.values[tri[2]]};
        std::sort(v, v + 3);
        HatPiece h{v[0], v[1], v[2], weights[piece.triangle], piece.lo, piece.hi};
        if (!h.point_mass() && (h.hi <= h.a || h.lo >= h.c)) continue;
        out.arcs[piece.arc].push_back(h);
    }
    return out;
}

struct EdgeMeasure {
    Index arc = -1;
    double f_lo = 0.0;
    double f_hi = 0.0;
    std::vector<double> A;   // cumulative area at K equally spaced levels
    std::vector<double> m;   // raw moments m_0 .. m_{N-1}
    std::vector<double> mu;  // moments after mapping [f_lo, f_hi] to [0, 1]

    double mass() const { return m.empty() ? 0.0 : m[0]; }
    double level(std::size_t j) const {
        return A.size() < 2 ? f_lo : f_lo + (f_hi - f_lo) * static_cast<double>(j) / static_cast<double>(A.size() - 1);
    }
};

struct MeasuredReebGraph {
    ReebGraph graph;
    std::vector<EdgeMeasure> edges;

    std::vector<double> total_moments() const {
        std::vector<double> tot(edges.empty() ? 0 : edges[0].m.size(), 0.0);
        for (const auto& e : edges)
            for (std::size_t i = 0; i < tot.size(); ++i) tot[i] += e.m[i];
        return tot;
    }
};

struct MomentPair {
    std::vector<double> raw;
    std::vector<double> rescaled;
};

/// Exact moments of one arc's measure, raw and on the rescaled interval.
inline MomentPair edge_moments(const std::vector<HatPiece>& pieces, double f_lo, double f_hi, int n) {
    if (n < 1) throw std::invalid_argument("moment count must be positive");
    const auto& rule = gauss_legendre(n / 2 + 1);
    MomentPair out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double width = f_hi - f_lo;
    std::vector<double> local_raw(n), local_res(n);
    auto accumulate = [&](double x, double w) {
        const double u = (x - f_lo) / width;
        double pr = w, pu = w;
        for (int i = 0; i < n; ++i) {
            local_raw[i] += pr;
            local_res[i] += pu;
            pr *= x;
            pu *= u;
        }
    };
    for (const auto& p : pieces) {
        std::fill(local_raw.begin(), local_raw.end(), 0.0);
        std::fill(local_res.begin(), local_res.end(), 0.0);
        if (p.point_mass()) {
            accumulate(p.a, p.mass);
        } else {
            auto segment = [&](double x0, double x1) {
                if (!(x1 > x0)) return;
                const double half = 0.5 * (x1 - x0), mid = 0.5 * (x0 + x1);
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                    const double x = mid + half * rule.nodes[q];
                    accumulate(x, rule.weights[q] * half * p.density(x));
                }
            };
            segment(std::max(p.lo, p.a), std::min(p.hi, p.b));
            segment(std::max(p.lo, p.b), std::min(p.hi, p.c));
        }
        for (int i = 0; i < n; ++i) {
            out.raw[i] += local_raw[i];
            out.rescaled[i] += local_res[i];
        }
    }
    return out;
}

/// Measured Reeb graph with N moments and K profile samples per arc.
inline MeasuredReebGraph pushforward_measure(const TriangulatedSurface& s, const MorseField& f, const ReebResult& reeb,
                                             int n_moments = 16, int k_samples = 256) {
    if (k_samples < 2) throw std::invalid_argument("need at least two profile samples");
    const ArcMeasures am = build_arc_measures(s, f, reeb);
    MeasuredReebGraph out;
    out.graph = reeb.graph;
    out.edges.resize(reeb.graph.arcs.size());
    for (Index e = 0; e < reeb.graph.num_arcs(); ++e) {
        EdgeMeasure& em = out.edges[e];
        em.arc = e;
        em.f_lo = reeb.graph.nodes[reeb.graph.arcs[e].tail].f;
        em.f_hi = reeb.graph.nodes[reeb.graph.arcs[e].head].f;
        auto mp = edge_moments(am.arcs[e], em.f_lo, em.f_hi, n_moments);
        em.m = std::move(mp.raw);
        em.mu = std::move(mp.rescaled);
        em.A.assign(k_samples, 0.0);
        for (int j = 0; j < k_samples; ++j) em.A[j] = am.cdf(e, em.level(j));
        em.A.front() = 0.0;
        em.A.back() = em.m[0];
    }
    return out;
}

/// Moments from differencing the sampled profile (midpoint rule).
inline std::vector<double> moments_from_profile(const EdgeMeasure& em, int n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 1; j < em.A.size(); ++j) {
        const double t = 0.5 * (em.level(j - 1) + em.level(j));
        const double da = em.A[j] - em.A[j - 1];
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            out[i] += p * da;
            p *= t;
        }
    }
    return out;
}

/// Relative gap between the summed arc masses and the surface area.
inline double volume_defect(const MeasuredReebGraph& g, const TriangulatedSurface& s) {
    double sum = 0.0;
    for (const auto& e : g.edges) sum += e.mass();
    return std::abs(sum - s.total_area()) / s.total_area();
}

struct ArcFit {
    Index arc = -1;
    bool trunk = false;
    double k = 0.0;  // coefficient of d ln|d|
    double q = 0.0;  // coefficient of d
    double p = 0.0;  // constant
    double residual = 0.0;
};

struct LogSingularityReport {
    Index node = -1;
    std::vector<ArcFit> fits;  // trunk first
    double psi1 = 0.0;         // estimate of the slope at the saddle
    std::vector<double> ratios;  // branch k / trunk k
    double max_ratio_error = 0.0;  // relative to -1/2
    double residual = 0.0;         // worst relative fit residual
    bool pattern_ok = false;
};

/// Least-squares fit of mu([v, x]) ~ k d ln|d| + q d + p, d = f(x) - f(v),
/// on every arc at a saddle, with d in a window [lo, hi] * gap where gap is
/// the distance in f to the nearest other node on those arcs.
inline LogSingularityReport log_singularity_diagnostic(const ArcMeasures& am, const ReebGraph& g, Index node,
                                                       double window_lo = 0.005, double window_hi = 0.05,
                                                       int samples = 40, double tol = 0.1) {
    if (node < 0 || node >= g.num_nodes()) throw OutOfRange("no node " + std::to_string(node));
    const auto ins = g.in_arcs()[node];
    const auto outs = g.out_arcs()[node];
    if (ins.size() + outs.size() != 3)
        throw InsufficientSamples("node " + std::to_string(node) + " is not 3-valent");
    if (samples < 4) throw InsufficientSamples("need at least four samples per arc");
    const double c = g.nodes[node].f;
    double gap = std::numeric_limits<double>::infinity();
    for (Index e : ins) gap = std::min(gap, c - g.nodes[g.arcs[e].tail].f);
    for (Index e : outs) gap = std::min(gap, g.nodes[g.arcs[e].head].f - c);

    const bool trunk_below = ins.size() == 1;
    std::vector<std::pair<Index, bool>> arcs;  // (arc, incoming)
    if (trunk_below) {
        arcs.push_back({ins[0], true});
        for (Index e : outs) arcs.push_back({e, false});
    } else {
        arcs.push_back({outs[0], false});
        for (Index e : ins) arcs.push_back({e, true});
    }

    LogSingularityReport r;
    r.node = node;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        const auto [arc, incoming] = arcs[i];
        const double full = am.total(arc);
        Eigen::MatrixXd X(samples, 3);
        Eigen::VectorXd y(samples);
        for (int j = 0; j < samples; ++j) {
            // Geometric spacing concentrates samples near the saddle.
            const double frac = window_lo * std::pow(window_hi / window_lo, static_cast<double>(j) / (samples - 1));
            const double mag = frac * gap;
            const double d = incoming ? -mag : mag;
            const double mu = incoming ? full - am.cdf(arc, c + d) : am.cdf(arc, c + d);
            X(j, 0) = d * std::log(mag);
            X(j, 1) = d;
            X(j, 2) = 1.0;
            y(j) = mu;
        }
        const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
        ArcFit fit;
        fit.arc = arc;
        fit.trunk = i == 0;
        fit.k = beta(0);
        fit.q = beta(1);
        fit.p = beta(2);
        fit.residual = (X * beta - y).norm() / std::max(y.norm(), 1e-300);
        r.fits.push_back(fit);
        r.residual = std::max(r.residual, fit.residual);
    }
    const double kt = r.fits[0].k;
    r.psi1 = (kt / 2.0 - r.fits[1].k - r.fits[2].k) / 3.0;
    for (std::size_t i = 1; i < r.fits.size(); ++i) {
        const double ratio = r.fits[i].k / kt;
        r.ratios.push_back(ratio);
        r.max_ratio_error = std::max(r.max_ratio_error, std::abs(ratio + 0.5) / 0.5);
    }
    r.pattern_ok = r.max_ratio_error <= tol;
    return r;
}

}  // namespace casimir
