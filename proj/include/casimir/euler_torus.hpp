#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <fftw3.h>

#include "casimir/circulation.hpp"
#include "casimir/errors.hpp"
#include "casimir/fixtures.hpp"
#include "casimir/measure.hpp"
#include "casimir/moments.hpp"
#include "casimir/morse.hpp"
#include "casimir/orbit.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/reeb.hpp"

namespace casimir {

/// F += amplitude * cos(kx x + ky y + phase).
struct FourierMode {
    int kx = 0;
    int ky = 0;
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Vorticity samples on the n x n grid over [0, 2pi)^2, stored at
/// fixtures::grid_vertex(n, i, j).
struct TorusFlowState {
    int n = 0;
    std::vector<double> F;
    double t = 0.0;

    double mean() const {
        long double s = 0.0L;
        for (double x : F) s += x;
        return static_cast<double>(s / static_cast<long double>(F.size()));
    }

    static TorusFlowState sample(int n, const std::function<double(double, double)>& fn) {
        return {n, fixtures::sample_grid(n, fn), 0.0};
    }

    static TorusFlowState from_modes(int n, const std::vector<FourierMode>& modes) {
        return sample(n, [&](double x, double y) {
            double s = 0.0;
            for (const auto& m : modes) s += m.amplitude * std::cos(m.kx * x + m.ky * y + m.phase);
            return s;
        });
    }
};

struct VelocityField {
    std::vector<double> u1;
    std::vector<double> u2;
    DiscreteOneForm flat;  // its discrete curl reproduces the sampled F
};

namespace detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanFree {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

}  // namespace detail

/// Pseudo-spectral solver for d_t F + u . grad F = 0 with u = (psi_y, -psi_x),
/// -Lap psi = F, 2/3-rule dealiasing and classical RK4.
class TorusEulerSolver {
public:
    using cplx = std::complex<double>;

    explicit TorusEulerSolver(int n, double cfl_limit = 1.0)
        : n_(n), nc_(n / 2 + 1), h_(fixtures::two_pi / n), cfl_limit_(cfl_limit), mesh_(fixtures::torus_grid(n)) {
        if (n < 8 || n % 2) throw std::invalid_argument("grid size must be even and at least 8");
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_ * n_)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_ * nc_)));
        fwd_.reset(fftw_plan_dft_r2c_2d(n_, n_, real_.get(), spec_.get(), FFTW_ESTIMATE));
        inv_.reset(fftw_plan_dft_c2r_2d(n_, n_, spec_.get(), real_.get(), FFTW_ESTIMATE));
        kmax_ = (n_ - 1) / 3;
        kx_.resize(n_ * nc_);
        ky_.resize(n_ * nc_);
        mask_.resize(n_ * nc_);
        for (int j = 0; j < n_; ++j) {
            for (int i = 0; i < nc_; ++i) {
                const int k = j * nc_ + i;
                kx_[k] = i;
                ky_[k] = j <= n_ / 2 ? j : j - n_;
                mask_[k] = std::abs(kx_[k]) <= kmax_ && std::abs(ky_[k]) <= kmax_;
            }
        }
    }

    int n() const { return n_; }
    int cutoff() const { return kmax_; }
    const TriangulatedSurface& mesh() const { return mesh_; }

    std::vector<cplx> forward(const std::vector<double>& f) const {
        std::copy(f.begin(), f.end(), real_.get());
        fftw_execute(fwd_.get());
        std::vector<cplx> out(n_ * nc_);
        for (int k = 0; k < n_ * nc_; ++k) out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
        return out;
    }

    std::vector<double> inverse(const std::vector<cplx>& s) const {
        for (int k = 0; k < n_ * nc_; ++k) {
            spec_.get()[k][0] = s[k].real();
            spec_.get()[k][1] = s[k].imag();
        }
        fftw_execute(inv_.get());
        const double norm = 1.0 / (static_cast<double>(n_) * n_);
        std::vector<double> out(real_.get(), real_.get() + n_ * n_);
        for (double& x : out) x *= norm;
        return out;
    }

    /// Zero mean and band-limited to the dealiasing cutoff.
    TorusFlowState project(const TorusFlowState& s) const {
        check(s);
        auto hat = forward(s.F);
        for (int k = 0; k < n_ * nc_; ++k)
            if (!mask_[k]) hat[k] = 0.0;
        hat[0] = 0.0;
        return {n_, inverse(hat), s.t};
    }

    /// Trigonometric interpolation of a band-limited state onto the grid of
    /// `target`, which must be at least as fine.
    TorusFlowState resample(const TorusFlowState& s, const TorusEulerSolver& target) const {
        check(s);
        const int N = target.n_;
        if (N < n_) throw std::invalid_argument("resample target grid is coarser");
        const auto hat = forward(s.F);
        std::vector<cplx> big(static_cast<std::size_t>(N) * target.nc_, 0.0);
        const double scale = (static_cast<double>(N) * N) / (static_cast<double>(n_) * n_);
        for (int k = 0; k < n_ * nc_; ++k) {
            if (!mask_[k]) continue;
            const int j = ky_[k] >= 0 ? ky_[k] : ky_[k] + N;
            big[static_cast<std::size_t>(j) * target.nc_ + kx_[k]] = scale * hat[k];
        }
        return {N, target.inverse(big), s.t};
    }

    std::pair<std::vector<double>, std::vector<double>> velocity_samples(const TorusFlowState& s) const {
        check(s);
        const auto hat = forward(s.F);
        std::vector<cplx> a(hat.size()), b(hat.size());
        for (int k = 0; k < n_ * nc_; ++k) {
            const double k2 = static_cast<double>(kx_[k]) * kx_[k] + static_cast<double>(ky_[k]) * ky_[k];
            const cplx psi = k2 > 0 ? hat[k] / k2 : 0.0;
            a[k] = cplx(0, ky_[k]) * psi;
            b[k] = cplx(0, -kx_[k]) * psi;
        }
        return {inverse(a), inverse(b)};
    }

    /// Velocity samples plus the grid one-form whose star-averaged curl is F.
    /// Edge values are exact line integrals of the velocity of the field
    /// deconvolved by the star-average symbol.
    VelocityField velocity(const TorusFlowState& s) const {
        require_zero_mean(s);
        VelocityField out;
        std::tie(out.u1, out.u2) = velocity_samples(s);
        const auto hat = forward(s.F);
        const auto& S = star_symbol();
        const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
        std::vector<std::tuple<Index, Index, double>> rows;
        rows.reserve(3 * static_cast<std::size_t>(n_) * n_);
        for (const auto& d : dirs) {
            std::vector<cplx> e(hat.size());
            for (int k = 0; k < n_ * nc_; ++k) {
                const double k2 = static_cast<double>(kx_[k]) * kx_[k] + static_cast<double>(ky_[k]) * ky_[k];
                if (k2 == 0 || !mask_[k]) continue;
                const cplx psi = hat[k] / (S[k] * k2);
                const cplx u1 = cplx(0, ky_[k]) * psi, u2 = cplx(0, -kx_[k]) * psi;
                const double theta = h_ * (kx_[k] * d[0] + ky_[k] * d[1]);
                const cplx phi = theta == 0.0 ? cplx(1.0) : (std::exp(cplx(0, theta)) - 1.0) / cplx(0, theta);
                e[k] = (u1 * (h_ * d[0]) + u2 * (h_ * d[1])) * phi;
            }
            const auto vals = inverse(e);
            for (int j = 0; j < n_; ++j)
                for (int i = 0; i < n_; ++i)
                    rows.emplace_back(fixtures::grid_vertex(n_, i, j), fixtures::grid_vertex(n_, i + d[0], j + d[1]),
                                      vals[fixtures::grid_vertex(n_, i, j)]);
        }
        out.flat = DiscreteOneForm::from_rows(mesh_, rows);
        return out;
    }

    /// Kinetic energy 1/2 integral of |u|^2.
    double energy(const TorusFlowState& s) const {
        const auto [u1, u2] = velocity_samples(s);
        long double e = 0.0L;
        for (std::size_t k = 0; k < u1.size(); ++k) e += u1[k] * u1[k] + u2[k] * u2[k];
        return static_cast<double>(0.5L * e * h_ * h_);
    }

    /// dt * max(|u1| + |u2|) / h.
    double courant(const TorusFlowState& s, double dt) const {
        const auto [u1, u2] = velocity_samples(s);
        double m = 0.0;
        for (std::size_t k = 0; k < u1.size(); ++k) m = std::max(m, std::abs(u1[k]) + std::abs(u2[k]));
        return dt * m / h_;
    }

    /// Largest step with Courant number `cfl` (capped at 0.1 for a resting fluid).
    double stable_dt(const TorusFlowState& s, double cfl = 0.4) const {
        const double c1 = courant(s, 1.0);
        return c1 > 0 ? std::min(cfl / c1, 0.1) : 0.1;
    }

    TorusFlowState step(const TorusFlowState& s, double dt) const {
        if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
        const double c = courant(s, dt);
        if (c > cfl_limit_)
            throw CFLViolation("Courant number " + std::to_string(c) + " exceeds " + std::to_string(cfl_limit_));
        require_zero_mean(s);
        auto F = forward(s.F);
        for (int k = 0; k < n_ * nc_; ++k)
            if (!mask_[k]) F[k] = 0.0;
        const auto k1 = rhs(F);
        const auto k2 = rhs(axpy(F, 0.5 * dt, k1));
        const auto k3 = rhs(axpy(F, 0.5 * dt, k2));
        const auto k4 = rhs(axpy(F, dt, k3));
        for (int k = 0; k < n_ * nc_; ++k) F[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        F[0] = 0.0;
        return {n_, inverse(F), s.t + dt};
    }

    /// Advances to time t_end in equal steps no longer than dt.
    TorusFlowState advance(TorusFlowState s, double t_end, double dt) const {
        const double span = t_end - s.t;
        if (span <= 0) return s;
        const int steps = static_cast<int>(std::ceil(span / dt - 1e-12));
        const double h = span / steps;
        for (int i = 0; i < steps; ++i) s = step(s, h);
        s.t = t_end;
        return s;
    }

    /// Average of exp(i k.x) over the vertex star, in grid units.
    const std::vector<double>& star_symbol() const {
        if (!symbol_.empty()) return symbol_;
        const double tri[6][3][2] = {{{0, 0}, {1, 0}, {1, 1}},   {{0, 0}, {1, 1}, {0, 1}},    {{-1, 0}, {0, 0}, {0, 1}},
                                     {{-1, -1}, {0, -1}, {0, 0}}, {{-1, -1}, {0, 0}, {-1, 0}}, {{0, -1}, {1, 0}, {0, 0}}};
        const auto& rule = gauss_legendre(12);
        symbol_.assign(n_ * nc_, 1.0);
        for (int k = 0; k < n_ * nc_; ++k) {
            if (!mask_[k]) continue;
            const double ax = h_ * kx_[k], ay = h_ * ky_[k];
            double sum = 0.0;
            for (const auto& t : tri) {
                // Collapsed square: p = a + s (b - a) + s r (c - b), dA = 2 A s.
                for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
                    const double sp = 0.5 * (rule.nodes[p] + 1.0), wp = 0.5 * rule.weights[p];
                    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                        const double rq = 0.5 * (rule.nodes[q] + 1.0), wq = 0.5 * rule.weights[q];
                        const double x = t[0][0] + sp * (t[1][0] - t[0][0]) + sp * rq * (t[2][0] - t[1][0]);
                        const double y = t[0][1] + sp * (t[1][1] - t[0][1]) + sp * rq * (t[2][1] - t[1][1]);
                        sum += wp * wq * sp * std::cos(ax * x + ay * y);  // 2 A = 1 in grid units
                    }
                }
            }
            symbol_[k] = sum / 3.0;  // star area is 3 in grid units
        }
        return symbol_;
    }

private:
    void check(const TorusFlowState& s) const {
        if (s.n != n_ || static_cast<int>(s.F.size()) != n_ * n_) throw CountMismatch("state does not match the solver grid");
    }

    void require_zero_mean(const TorusFlowState& s) const {
        check(s);
        double scale = 0.0;
        for (double x : s.F) scale = std::max(scale, std::abs(x));
        if (std::abs(s.mean()) > 1e-12 * std::max(scale, 1.0)) throw NonZeroMean("vorticity has nonzero mean");
    }

    static std::vector<cplx> axpy(const std::vector<cplx>& x, double a, const std::vector<cplx>& y) {
        std::vector<cplx> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + a * y[k];
        return out;
    }

    // Spectral -(u . grad F), dealiased, zero mean.
    std::vector<cplx> rhs(const std::vector<cplx>& F) const {
        const int m = n_ * nc_;
        std::vector<cplx> u1(m), u2(m), fx(m), fy(m);
        for (int k = 0; k < m; ++k) {
            const double k2 = static_cast<double>(kx_[k]) * kx_[k] + static_cast<double>(ky_[k]) * ky_[k];
            const cplx psi = k2 > 0 ? F[k] / k2 : 0.0;
            u1[k] = cplx(0, ky_[k]) * psi;
            u2[k] = cplx(0, -kx_[k]) * psi;
            fx[k] = cplx(0, kx_[k]) * F[k];
            fy[k] = cplx(0, ky_[k]) * F[k];
        }
        const auto U1 = inverse(u1), U2 = inverse(u2), FX = inverse(fx), FY = inverse(fy);
        std::vector<double> adv(U1.size());
        for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = -(U1[i] * FX[i] + U2[i] * FY[i]);
        auto out = forward(adv);
        for (int k = 0; k < m; ++k)
            if (!mask_[k]) out[k] = 0.0;
        out[0] = 0.0;
        return out;
    }

    int n_, nc_;
    double h_;
    double cfl_limit_;
    int kmax_ = 0;
    TriangulatedSurface mesh_;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
    std::unique_ptr<fftw_plan_s, detail::PlanFree> fwd_, inv_;
    std::vector<int> kx_, ky_;
    std::vector<char> mask_;
    mutable std::vector<double> symbol_;
};

inline VelocityField velocity_from_vorticity(const TorusFlowState& s) { return TorusEulerSolver(s.n).velocity(s); }

struct TraceOptions {
    int n_moments = 8;
    int k_samples = 64;
    double dt = 0.0;        // 0 picks the step from cfl
    double cfl = 0.4;
    double tie_tol = 1e-10; // near-ties grouped before index perturbation
    int levels = 32;        // levels of the distribution function
    double match_tol = 0.05;
    // Leaf arcs shorter than prune_tol * range are cancelled. Stretched
    // saddles split into a min or max and two saddles on the triangulated
    // grid, with a span that shrinks like h^2.
    double prune_tol = 1e-2;
    // Snapshots are interpolated onto a grid this many times finer before
    // the piecewise-linear analysis, whose error is O(h^2).
    int upsample = 1;
};

struct CasimirSample {
    double t = 0.0;
    std::vector<std::vector<double>> edge_moments;  // by arc of the initial graph
    std::vector<double> total_moments;
    std::vector<double> circulation;   // at the pinned level of each initial arc
    std::vector<double> distribution;  // area of {F <= c} on the level grid
    double energy = 0.0;
    double mean = 0.0;
    int betti1 = 0;
};

/// Largest relative change from the first sample. Moments of order i on an
/// arc are scaled by m_0 R^i, R the largest |f| on the arc; circulations by
/// the largest initial circulation; distribution by the total area.
struct DriftSummary {
    double edge_moments = 0.0;
    double total_moments = 0.0;
    double circulation = 0.0;
    double distribution = 0.0;
    double energy = 0.0;
    double mean = 0.0;  // absolute
};

struct CasimirTrace {
    ReebGraph initial_graph;
    std::vector<double> pin_levels;
    std::vector<double> level_grid;
    std::vector<CasimirSample> samples;
    DriftSummary drift;
};

namespace detail {

struct Snapshot {
    MorseField field;
    ReebResult reeb;
    MeasuredReebGraph fine;    // before pruning
    PrunedGraph pruned;
    MeasuredReebGraph measured;  // on the pruned graph
    DiscreteOneForm flat;

    /// Circulation of the level set {F = t} restricted to pruned arc e.
    double circulation(const TriangulatedSurface& mesh, Index e, double t) const {
        double c = 0.0;
        bool hit = false;
        for (Index a : pruned.members[e]) {
            const auto& em = fine.edges[a];
            if (t <= em.f_lo || t >= em.f_hi) continue;
            c += circulation_from_oneform(mesh, field, reeb, flat, a, t);
            hit = true;
        }
        if (!hit) throw OutOfRange("level outside the arc");
        return c;
    }
};

inline Snapshot analyze_snapshot(const TorusEulerSolver& solver, const TorusFlowState& s, const TraceOptions& opt) {
    const auto& mesh = solver.mesh();
    Snapshot out;
    out.flat = solver.velocity(s).flat;
    out.field = perturb_to_simple(classify_vertices(mesh, s.F), mesh, -1.0, opt.tie_tol);
    require_simple(out.field, mesh);
    out.reeb = build_reeb(mesh, out.field);
    out.fine = pushforward_measure(mesh, out.field, out.reeb, opt.n_moments, opt.k_samples);
    const double range = out.field.max_value() - out.field.min_value();
    out.pruned = prune_leaves(out.reeb.graph, opt.prune_tol * range);
    out.measured.graph = out.pruned.graph;
    for (Index e = 0; e < out.pruned.graph.num_arcs(); ++e) {
        EdgeMeasure em;
        em.arc = e;
        em.f_lo = out.pruned.graph.nodes[out.pruned.graph.arcs[e].tail].f;
        em.f_hi = out.pruned.graph.nodes[out.pruned.graph.arcs[e].head].f;
        em.m.assign(opt.n_moments, 0.0);
        for (Index a : out.pruned.members[e])
            for (int i = 0; i < opt.n_moments; ++i) em.m[i] += out.fine.edges[a].m[i];
        em.mu = MomentSequence{em.f_lo, em.f_hi, em.m}.rescaled();
        out.measured.edges.push_back(std::move(em));
    }
    return out;
}

inline std::vector<double> distribution(const TriangulatedSurface& s, const std::vector<double>& F,
                                        const std::vector<double>& levels) {
    std::vector<double> out(levels.size(), 0.0);
    for (Index t = 0; t < s.num_triangles(); ++t) {
        const auto& tri = s.triangles()[t];
        double v[3] = {F[tri[0]], F[tri[1]], F[tri[2]]};
        std::sort(v, v + 3);
        const HatPiece h{v[0], v[1], v[2], s.areas()[t], v[0], v[2]};
        for (std::size_t c = 0; c < levels.size(); ++c) out[c] += h.cdf(levels[c]);
    }
    return out;
}

}  // namespace detail

/// Integrates the flow and evaluates the Casimirs at the sample times.
/// Throws TopologyChange when the Reeb graph of a snapshot no longer
/// matches the initial one.
inline CasimirTrace casimir_trace(const TorusFlowState& initial, const std::vector<double>& sample_times,
                                  const TraceOptions& opt = {}) {
    if (opt.upsample < 1) throw std::invalid_argument("upsample factor must be at least 1");
    const TorusEulerSolver solver(initial.n);
    const TorusEulerSolver analysis(initial.n * opt.upsample);
    const auto& mesh = analysis.mesh();
    TorusFlowState state = solver.project(initial);
    const double dt = opt.dt > 0 ? opt.dt : solver.stable_dt(state, opt.cfl);
    auto fine = [&](const TorusFlowState& s) { return solver.resample(s, analysis); };

    CasimirTrace trace;
    const auto first = detail::analyze_snapshot(analysis, fine(state), opt);
    const auto& g0 = first.measured;
    trace.initial_graph = g0.graph;
    for (const auto& em : g0.edges) trace.pin_levels.push_back(0.5 * (em.f_lo + em.f_hi));
    const double fmin = *std::min_element(state.F.begin(), state.F.end());
    const double fmax = *std::max_element(state.F.begin(), state.F.end());
    for (int c = 1; c < opt.levels; ++c) trace.level_grid.push_back(fmin + (fmax - fmin) * c / opt.levels);

    OrbitOptions match;
    match.n_moments = 2;
    match.tol_rel = opt.match_tol;
    match.tol_f = opt.match_tol;

    auto record = [&](const TorusFlowState& s, const detail::Snapshot& snap) {
        CasimirSample smp;
        smp.t = s.t;
        const auto& g = snap.measured;
        const auto iso = measured_iso(g0, g, match);
        if (!iso)
            throw TopologyChange("Reeb graph changed at t = " + std::to_string(s.t) + " (" + iso.witness.detail + ")", s.t);
        for (Index e = 0; e < g0.graph.num_arcs(); ++e) {
            const Index h = iso.matching.arc_map[e];
            smp.edge_moments.push_back(g.edges[h].m);
            const auto& em = g.edges[h];
            const double level = trace.pin_levels[e];
            if (level <= em.f_lo || level >= em.f_hi)
                throw TopologyChange("pinned level left its arc at t = " + std::to_string(s.t), s.t);
            smp.circulation.push_back(snap.circulation(mesh, h, level));
        }
        smp.total_moments = g.total_moments();
        smp.distribution = detail::distribution(mesh, snap.field.values, trace.level_grid);
        smp.energy = solver.energy(s);
        smp.mean = s.mean();
        smp.betti1 = g.graph.betti1();
        trace.samples.push_back(std::move(smp));
    };

    record(state, first);
    for (double t : sample_times) {
        if (t < state.t - 1e-12) throw std::invalid_argument("sample times must be increasing");
        if (t <= state.t) continue;
        state = solver.advance(state, t, dt);
        record(state, detail::analyze_snapshot(analysis, fine(state), opt));
    }

    // Drift against the first sample.
    const auto& s0 = trace.samples.front();
    double fabs_max = std::max(std::abs(fmin), std::abs(fmax));
    double cscale = 0.0;
    for (double c : s0.circulation) cscale = std::max(cscale, std::abs(c));
    auto& d = trace.drift;
    for (const auto& smp : trace.samples) {
        for (std::size_t e = 0; e < smp.edge_moments.size(); ++e) {
            const auto& em0 = g0.edges[e];
            const double R = std::max({std::abs(em0.f_lo), std::abs(em0.f_hi), 1e-300});
            for (std::size_t i = 0; i < smp.edge_moments[e].size(); ++i) {
                const double scale = s0.edge_moments[e][0] * std::pow(R, static_cast<double>(i));
                d.edge_moments = std::max(d.edge_moments, std::abs(smp.edge_moments[e][i] - s0.edge_moments[e][i]) / scale);
            }
            if (cscale > 0)
                d.circulation = std::max(d.circulation, std::abs(smp.circulation[e] - s0.circulation[e]) / cscale);
        }
        for (std::size_t i = 0; i < smp.total_moments.size(); ++i) {
            const double scale = mesh.total_area() * std::pow(fabs_max, static_cast<double>(i));
            d.total_moments = std::max(d.total_moments, std::abs(smp.total_moments[i] - s0.total_moments[i]) / scale);
        }
        for (std::size_t c = 0; c < smp.distribution.size(); ++c)
            d.distribution = std::max(d.distribution, std::abs(smp.distribution[c] - s0.distribution[c]) / mesh.total_area());
        if (s0.energy > 0) d.energy = std::max(d.energy, std::abs(smp.energy - s0.energy) / s0.energy);
        d.mean = std::max(d.mean, std::abs(smp.mean - s0.mean));
    }
    return trace;
}

}  // namespace casimir
