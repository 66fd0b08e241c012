#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "casimir/errors.hpp"
#include "casimir/measure.hpp"
#include "casimir/morse.hpp"
#include "casimir/reeb.hpp"
#include "casimir/surface.hpp"

namespace casimir {

/// Real value per mesh edge, stored for the orientation a -> b with a < b.
class DiscreteOneForm {
public:
    DiscreteOneForm() = default;
    explicit DiscreteOneForm(std::vector<double> values) : values_(std::move(values)) {}

    static DiscreteOneForm zero(const TriangulatedSurface& s) {
        return DiscreteOneForm(std::vector<double>(s.num_edges(), 0.0));
    }

    /// From (u, v, value) rows covering every edge exactly once.
    static DiscreteOneForm from_rows(const TriangulatedSurface& s,
                                     const std::vector<std::tuple<Index, Index, double>>& rows) {
        std::vector<double> values(s.num_edges(), 0.0);
        std::vector<char> seen(s.num_edges(), 0);
        for (const auto& [u, v, w] : rows) {
            if (u < 0 || v < 0 || u >= s.num_vertices() || v >= s.num_vertices())
                throw ParseError("one-form row references vertex out of range");
            const auto e = s.find_edge(u, v);
            if (!e) throw ParseError("one-form row (" + std::to_string(u) + "," + std::to_string(v) + ") is not an edge");
            if (seen[*e]) throw ParseError("one-form lists edge (" + std::to_string(u) + "," + std::to_string(v) + ") twice");
            seen[*e] = 1;
            values[*e] = u < v ? w : -w;
        }
        if (rows.size() != static_cast<std::size_t>(s.num_edges()))
            throw CountMismatch("one-form has " + std::to_string(rows.size()) + " rows for " +
                                std::to_string(s.num_edges()) + " edges");
        return DiscreteOneForm(std::move(values));
    }

    std::vector<std::tuple<Index, Index, double>> rows(const TriangulatedSurface& s) const {
        std::vector<std::tuple<Index, Index, double>> out;
        out.reserve(values_.size());
        for (Index e = 0; e < s.num_edges(); ++e) out.emplace_back(s.edges()[e].a, s.edges()[e].b, values_[e]);
        return out;
    }

    /// Value on the oriented edge u -> v.
    double operator()(const TriangulatedSurface& s, Index u, Index v) const {
        const auto oe = s.oriented_edge(u, v);
        return oe.sign * values_[oe.edge];
    }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    DiscreteOneForm operator+(const DiscreteOneForm& o) const {
        std::vector<double> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
        return DiscreteOneForm(std::move(v));
    }

    DiscreteOneForm operator*(double c) const {
        std::vector<double> v(values_);
        for (double& x : v) x *= c;
        return DiscreteOneForm(std::move(v));
    }

private:
    std::vector<double> values_;
};

/// Exact form df of a vertex function.
inline DiscreteOneForm exterior_derivative(const TriangulatedSurface& s, const std::vector<double>& f) {
    std::vector<double> v(s.num_edges());
    for (Index e = 0; e < s.num_edges(); ++e) v[e] = f[s.edges()[e].b] - f[s.edges()[e].a];
    return DiscreteOneForm(std::move(v));
}

/// Oriented boundary sum of the form over each triangle.
inline std::vector<double> exterior_derivative(const TriangulatedSurface& s, const DiscreteOneForm& a) {
    std::vector<double> d(s.num_triangles(), 0.0);
    for (Index t = 0; t < s.num_triangles(); ++t)
        for (const auto& oe : s.triangle_edges(t)) d[t] += oe.sign * a.values()[oe.edge];
    return d;
}

/// Vertex vorticity: star sum of d(alpha) over star area.
inline std::vector<double> curl(const TriangulatedSurface& s, const DiscreteOneForm& a) {
    const auto d = exterior_derivative(s, a);
    std::vector<double> num(s.num_vertices(), 0.0), den(s.num_vertices(), 0.0);
    for (Index t = 0; t < s.num_triangles(); ++t) {
        for (Index v : s.triangles()[t]) {
            num[v] += d[t];
            den[v] += s.areas()[t];
        }
    }
    for (Index v = 0; v < s.num_vertices(); ++v) num[v] /= den[v];
    return num;
}

/// Lumped vertex weights (one third of the star area).
inline std::vector<double> vertex_weights(const TriangulatedSurface& s) {
    std::vector<double> w(s.num_vertices(), 0.0);
    for (Index t = 0; t < s.num_triangles(); ++t)
        for (Index v : s.triangles()[t]) w[v] += s.areas()[t] / 3.0;
    return w;
}

/// Mean of a vertex function under the lumped weights.
inline double lumped_mean(const TriangulatedSurface& s, const std::vector<double>& f) {
    const auto w = vertex_weights(s);
    double num = 0.0;
    for (Index v = 0; v < s.num_vertices(); ++v) num += w[v] * f[v];
    return num / s.total_area();
}

/// Minimum-norm one-form whose curl is F. F must have zero lumped mean.
inline DiscreteOneForm inverse_curl(const TriangulatedSurface& s, const std::vector<double>& F) {
    const Index nv = s.num_vertices(), ne = s.num_edges();
    double scale = 0.0;
    for (double x : F) scale = std::max(scale, std::abs(x));
    if (std::abs(lumped_mean(s, F)) > 1e-10 * std::max(scale, 1.0))
        throw NonZeroMean("vorticity has nonzero mean");

    std::vector<double> W(nv, 0.0);
    for (Index t = 0; t < s.num_triangles(); ++t)
        for (Index v : s.triangles()[t]) W[v] += s.areas()[t];

    // B = S * D, vertex x edge.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(s.num_triangles()) * 9);
    for (Index t = 0; t < s.num_triangles(); ++t)
        for (Index v : s.triangles()[t])
            for (const auto& oe : s.triangle_edges(t)) trips.emplace_back(v, oe.edge, static_cast<double>(oe.sign));
    Eigen::SparseMatrix<double> B(nv, ne);
    B.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseMatrix<double> M = B * B.transpose();
    Eigen::VectorXd b(nv);
    for (Index v = 0; v < nv; ++v) b(v) = W[v] * F[v];

    // Pin y_0 = 0 to remove the constant kernel.
    for (int k = 0; k < M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
            if (it.row() == 0 || it.col() == 0) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
    b(0) = 0.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    if (solver.info() != Eigen::Success) throw Error("curl system factorization failed");
    const Eigen::VectorXd y = solver.solve(b);
    const Eigen::VectorXd alpha = B.transpose() * y;

    DiscreteOneForm out(std::vector<double>(alpha.data(), alpha.data() + ne));
    const auto back = curl(s, out);
    double err = 0.0;
    for (Index v = 0; v < nv; ++v) err = std::max(err, std::abs(back[v] - F[v]));
    if (!(err <= 1e-8 * std::max(scale, 1.0)))
        throw Error("field is not in the image of the discrete curl on this mesh (residual " + std::to_string(err) + ")");
    return out;
}

/// Signed density on a graph: per-arc totals with optional cumulative
/// profiles at equally spaced levels. Without a profile the density is
/// taken uniform in f along the arc.
struct GraphDensity {
    std::vector<double> total;
    std::vector<double> f_lo;
    std::vector<double> f_hi;
    std::vector<std::vector<double>> profile;

    double sum() const {
        double s = 0.0;
        for (double x : total) s += x;
        return s;
    }

    /// rho([f_lo, t]) on arc e.
    double partial(Index e, double t) const {
        const double w = f_hi[e] - f_lo[e];
        const double u = std::clamp(w > 0 ? (t - f_lo[e]) / w : 0.0, 0.0, 1.0);
        if (profile.empty() || profile[e].size() < 2) return u * total[e];
        const auto& p = profile[e];
        const double x = u * static_cast<double>(p.size() - 1);
        const std::size_t j = std::min(static_cast<std::size_t>(x), p.size() - 2);
        return p[j] + (x - static_cast<double>(j)) * (p[j + 1] - p[j]);
    }

    static GraphDensity from_totals(const ReebGraph& g, std::vector<double> totals) {
        GraphDensity d;
        d.total = std::move(totals);
        for (const auto& a : g.arcs) {
            d.f_lo.push_back(g.nodes[a.tail].f);
            d.f_hi.push_back(g.nodes[a.head].f);
        }
        return d;
    }
};

/// rho(I) = integral of f dmu, exact from the arc pieces.
inline GraphDensity graph_density(const ArcMeasures& am, const ReebGraph& g, int k_samples = 256) {
    GraphDensity d = GraphDensity::from_totals(g, std::vector<double>(g.arcs.size(), 0.0));
    d.profile.resize(g.arcs.size());
    for (Index e = 0; e < g.num_arcs(); ++e) {
        d.total[e] = am.moment_upto(e, d.f_hi[e], 1);
        auto& p = d.profile[e];
        p.resize(k_samples);
        for (int j = 0; j < k_samples; ++j) {
            const double t = d.f_lo[e] + (d.f_hi[e] - d.f_lo[e]) * j / (k_samples - 1.0);
            p[j] = am.moment_upto(e, t, 1);
        }
        p.front() = 0.0;
        p.back() = d.total[e];
    }
    return d;
}

/// rho(I) from a measured graph: totals are the first moments; profiles
/// come from the sampled cumulative areas.
inline GraphDensity graph_density(const MeasuredReebGraph& mg) {
    std::vector<double> totals;
    for (const auto& em : mg.edges) totals.push_back(em.m.size() > 1 ? em.m[1] : 0.0);
    GraphDensity d = GraphDensity::from_totals(mg.graph, std::move(totals));
    d.profile.resize(mg.edges.size());
    for (std::size_t e = 0; e < mg.edges.size(); ++e) {
        const auto& em = mg.edges[e];
        auto& p = d.profile[e];
        p.assign(em.A.size(), 0.0);
        for (std::size_t j = 1; j < em.A.size(); ++j)
            p[j] = p[j - 1] + 0.5 * (em.level(j - 1) + em.level(j)) * (em.A[j] - em.A[j - 1]);
        if (!p.empty()) p.back() = d.total[e];
    }
    return d;
}

/// Antiderivative stored by its limits at both ends of every arc; inside
/// an arc the value is tail_limit + rho([f_lo, t]).
struct Antiderivative {
    std::vector<double> tail_limit;
    std::vector<double> head_limit;

    double value(const GraphDensity& rho, Index e, double t) const { return tail_limit[e] + rho.partial(e, t); }
};

struct AntiderivativeSpace {
    Antiderivative particular;
    std::vector<Antiderivative> basis;  // homogeneous solutions (rho = 0)
    int kernel_dimension = 0;           // reported by the rank-revealing solve
};

namespace detail {

// Kirchhoff system in the tail offsets: A o = b.
inline void kirchhoff_system(const ReebGraph& g, const std::vector<double>& rho, Eigen::MatrixXd& A,
                             Eigen::VectorXd& b) {
    A = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_arcs());
    b = Eigen::VectorXd::Zero(g.num_nodes());
    for (Index e = 0; e < g.num_arcs(); ++e) {
        const auto& a = g.arcs[e];
        A(a.head, e) += 1.0;  // incoming limit o_e + rho_e
        b(a.head) -= rho[e];
        A(a.tail, e) -= 1.0;  // outgoing limit o_e
    }
}

inline void snap_leaves(const ReebGraph& g, Antiderivative& a) {
    std::vector<int> deg(g.nodes.size(), 0);
    for (const auto& arc : g.arcs) {
        ++deg[arc.tail];
        ++deg[arc.head];
    }
    for (Index e = 0; e < g.num_arcs(); ++e) {
        if (deg[g.arcs[e].tail] == 1) a.tail_limit[e] = 0.0;
        if (deg[g.arcs[e].head] == 1) a.head_limit[e] = 0.0;
    }
}

// Spanning forest over nodes; returns per-arc flag.
inline std::vector<char> spanning_tree(const ReebGraph& g, const std::vector<char>& excluded) {
    UnionFind uf(g.num_nodes());
    std::vector<char> in_tree(g.arcs.size(), 0);
    for (Index e = 0; e < g.num_arcs(); ++e)
        if (!excluded[e] && uf.unite(g.arcs[e].tail, g.arcs[e].head)) in_tree[e] = 1;
    return in_tree;
}

// Signed arc indicator of the fundamental cycle of a non-tree arc.
inline std::vector<double> fundamental_cycle(const ReebGraph& g, const std::vector<char>& in_tree, Index extra) {
    const Index n = g.num_nodes();
    std::vector<std::vector<std::pair<Index, Index>>> adj(n);  // (neighbour, arc)
    for (Index e = 0; e < g.num_arcs(); ++e) {
        if (!in_tree[e]) continue;
        adj[g.arcs[e].tail].push_back({g.arcs[e].head, e});
        adj[g.arcs[e].head].push_back({g.arcs[e].tail, e});
    }
    // Path in the tree from head(extra) back to tail(extra).
    const Index src = g.arcs[extra].head, dst = g.arcs[extra].tail;
    std::vector<Index> via(n, -2), from(n, -1);
    std::vector<Index> stack{src};
    via[src] = -1;
    while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        for (auto [w, e] : adj[v]) {
            if (via[w] != -2) continue;
            via[w] = e;
            from[w] = v;
            stack.push_back(w);
        }
    }
    std::vector<double> ind(g.arcs.size(), 0.0);
    ind[extra] = 1.0;  // traversed tail -> head
    for (Index v = dst; v != src; v = from[v]) {
        const Index e = via[v];
        // Walking from[v] -> v is forward when the arc points that way.
        ind[e] += (g.arcs[e].head == v) ? 1.0 : -1.0;
    }
    return ind;
}

}  // namespace detail

/// Kirchhoff residual per node.
inline std::vector<double> kirchhoff_residuals(const ReebGraph& g, const Antiderivative& a) {
    std::vector<double> r(g.nodes.size(), 0.0);
    for (Index e = 0; e < g.num_arcs(); ++e) {
        r[g.arcs[e].head] += a.head_limit[e];
        r[g.arcs[e].tail] -= a.tail_limit[e];
    }
    return r;
}

inline AntiderivativeSpace antiderivative_space(const ReebGraph& g, const GraphDensity& rho, double tol = 1e-10) {
    double scale = 0.0;
    for (double x : rho.total) scale = std::max(scale, std::abs(x));
    const double total = rho.sum();
    if (std::abs(total) > tol * std::max(scale, 1.0))
        throw NoSolution("density has total mass " + std::to_string(total) + "; no antiderivative exists", total);

    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    detail::kirchhoff_system(g, rho.total, A, b);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd o = lu.solve(b);

    AntiderivativeSpace out;
    out.kernel_dimension = static_cast<int>(lu.dimensionOfKernel());
    auto& p = out.particular;
    p.tail_limit.resize(g.arcs.size());
    p.head_limit.resize(g.arcs.size());
    for (Index e = 0; e < g.num_arcs(); ++e) {
        p.tail_limit[e] = o(e);
        p.head_limit[e] = o(e) + rho.total[e];
    }
    detail::snap_leaves(g, p);

    const auto in_tree = detail::spanning_tree(g, std::vector<char>(g.arcs.size(), 0));
    for (Index e = 0; e < g.num_arcs(); ++e) {
        if (in_tree[e]) continue;
        const auto ind = detail::fundamental_cycle(g, in_tree, e);
        out.basis.push_back({ind, ind});
    }
    return out;
}

/// Where a circulation value is prescribed: arc plus level t in
/// [f_lo, f_hi]; the endpoints give the one-sided limits.
struct Pin {
    Index arc;
    double t;
    double value;
};

inline Antiderivative pin_circulations(const ReebGraph& g, const GraphDensity& rho, const std::vector<Pin>& pins,
                                       double tol = 1e-10) {
    std::vector<char> cut(g.arcs.size(), 0);
    for (const auto& pin : pins) {
        if (pin.arc < 0 || pin.arc >= g.num_arcs()) throw BadPinPlacement("pin on unknown arc");
        if (cut[pin.arc]) throw BadPinPlacement("two pins on arc " + std::to_string(pin.arc));
        cut[pin.arc] = 1;
    }
    const auto tree = detail::spanning_tree(g, cut);
    Index tree_arcs = 0;
    for (char c : tree) tree_arcs += c;
    Index uncut = 0;
    for (char c : cut) uncut += !c;
    if (tree_arcs != g.num_nodes() - 1) throw BadPinPlacement("cutting at the pins disconnects the graph");
    if (uncut != tree_arcs) throw BadPinPlacement("cutting at the pins leaves a cycle");

    double scale = 0.0;
    for (double x : rho.total) scale = std::max(scale, std::abs(x));
    if (std::abs(rho.sum()) > tol * std::max(scale, 1.0))
        throw NoSolution("density has nonzero total mass", rho.sum());

    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    detail::kirchhoff_system(g, rho.total, A, b);
    const Index rows = g.num_nodes() + static_cast<Index>(pins.size());
    Eigen::MatrixXd Af = Eigen::MatrixXd::Zero(rows, g.num_arcs());
    Eigen::VectorXd bf(rows);
    Af.topRows(g.num_nodes()) = A;
    bf.head(g.num_nodes()) = b;
    for (std::size_t i = 0; i < pins.size(); ++i) {
        const auto& pin = pins[i];
        Af(g.num_nodes() + i, pin.arc) = 1.0;
        bf(g.num_nodes() + i) = pin.value - rho.partial(pin.arc, pin.t);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Af);
    const Eigen::VectorXd o = lu.solve(bf);
    const double res = (Af * o - bf).norm();
    if (res > tol * std::max({scale, bf.norm(), 1.0})) throw Infeasible("pinned values violate the Kirchhoff rule");

    Antiderivative a;
    a.tail_limit.resize(g.arcs.size());
    a.head_limit.resize(g.arcs.size());
    for (Index e = 0; e < g.num_arcs(); ++e) {
        a.tail_limit[e] = o(e);
        a.head_limit[e] = o(e) + rho.total[e];
    }
    detail::snap_leaves(g, a);
    return a;
}

/// Whitney integral of the form along an oriented level cycle.
inline double cycle_integral(const TriangulatedSurface& s, const DiscreteOneForm& a, const LevelCycle& cyc) {
    const std::size_t n = cyc.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const Triangle& tri = s.triangles()[cyc.triangles[i]];
        double p[3] = {0, 0, 0}, q[3] = {0, 0, 0};
        for (int k = 0; k < 3; ++k) {
            if (tri[k] == cyc.below[i]) p[k] += 1.0 - cyc.s[i];
            if (tri[k] == cyc.above[i]) p[k] += cyc.s[i];
            if (tri[k] == cyc.below[j]) q[k] += 1.0 - cyc.s[j];
            if (tri[k] == cyc.above[j]) q[k] += cyc.s[j];
        }
        const auto& te = s.triangle_edges(cyc.triangles[i]);
        for (int k = 0; k < 3; ++k) {
            const int l = (k + 1) % 3;
            const double akl = te[k].sign * a.values()[te[k].edge];
            sum += akl * (p[k] * q[l] - p[l] * q[k]);
        }
    }
    return sum;
}

/// Circulation of the form around the level cycle of arc at t.
inline double circulation_from_oneform(const TriangulatedSurface& s, const MorseField& f, const ReebResult& reeb,
                                       const DiscreteOneForm& a, Index arc, double t) {
    return cycle_integral(s, a, level_cycle(s, f, reeb, arc, t));
}

struct ArcCirculation {
    double t_mid = 0.0;
    double c_mid = 0.0;
    double c_lo_limit = 0.0;
    double c_hi_limit = 0.0;
    double rho = 0.0;     // vorticity carried by the arc
    double rho_pl = 0.0;  // integral of the PL field against the area
};

struct CirculationGraph {
    MeasuredReebGraph measured;
    std::vector<ArcCirculation> arcs;
    double kirchhoff_residual = 0.0;
    double newton_leibniz_residual = 0.0;
    double tolerance = 0.0;
    double density_gap = 0.0;  // max |rho - rho_pl| over arcs

    Antiderivative antiderivative() const {
        Antiderivative a;
        for (const auto& c : arcs) {
            a.tail_limit.push_back(c.c_lo_limit);
            a.head_limit.push_back(c.c_hi_limit);
        }
        return a;
    }
};

struct CirculationOptions {
    int n_moments = 16;
    int k_samples = 256;
    double tol_rel = 1e-6;
};

/// Measured graph of F with the circulation function of the form sampled
/// at arc midpoints and extended to the limits by the vorticity density.
inline CirculationGraph build_circulation_graph(const TriangulatedSurface& s, const MorseField& f,
                                                const DiscreteOneForm& a, const CirculationOptions& opt = {}) {
    const ReebResult reeb = build_reeb(s, f);
    CirculationGraph out;
    out.measured = pushforward_measure(s, f, reeb, opt.n_moments, opt.k_samples);
    const auto& g = reeb.graph;
    const auto dalpha = exterior_derivative(s, a);
    const ArcMeasures vort = build_arc_measures(s, f, reeb, &dalpha);
    const ArcMeasures area = build_arc_measures(s, f, reeb);

    out.arcs.resize(g.arcs.size());
    double scale = 0.0;
    std::vector<double> nl(g.arcs.size(), 0.0);
    for (Index e = 0; e < g.num_arcs(); ++e) {
        auto& c = out.arcs[e];
        const double lo = g.nodes[g.arcs[e].tail].f, hi = g.nodes[g.arcs[e].head].f;
        c.t_mid = 0.5 * (lo + hi);
        c.c_mid = circulation_from_oneform(s, f, reeb, a, e, c.t_mid);
        c.rho = vort.total(e);
        c.rho_pl = area.moment_upto(e, hi, 1);
        const double below = vort.cdf(e, c.t_mid);
        c.c_lo_limit = c.c_mid - below;
        c.c_hi_limit = c.c_mid + (c.rho - below);
        scale = std::max({scale, std::abs(c.c_mid), std::abs(c.c_lo_limit), std::abs(c.c_hi_limit)});
        for (double frac : {0.25, 0.75}) {
            const double t = lo + frac * (hi - lo);
            const double direct = circulation_from_oneform(s, f, reeb, a, e, t);
            const double predicted = c.c_lo_limit + vort.cdf(e, t);
            nl[e] = std::max(nl[e], std::abs(direct - predicted));
            scale = std::max(scale, std::abs(direct));
        }
        out.density_gap = std::max(out.density_gap, std::abs(c.rho - c.rho_pl));
    }
    double dscale = 0.0;
    for (double d : dalpha) dscale += std::abs(d);
    out.tolerance = opt.tol_rel * std::max(scale, 1e-12 * std::max(dscale, 1e-300));

    Antiderivative anti = out.antiderivative();
    const auto res = kirchhoff_residuals(g, anti);
    for (Index v = 0; v < g.num_nodes(); ++v) {
        // 1-valent: the single limit must vanish.
        out.kirchhoff_residual = std::max(out.kirchhoff_residual, std::abs(res[v]));
        if (std::abs(res[v]) > out.tolerance)
            throw AntiderivativeViolation("Kirchhoff rule fails at node " + std::to_string(v), v, res[v]);
    }
    for (Index e = 0; e < g.num_arcs(); ++e) {
        out.newton_leibniz_residual = std::max(out.newton_leibniz_residual, nl[e]);
        if (nl[e] > out.tolerance)
            throw AntiderivativeViolation("Newton-Leibniz rule fails on arc " + std::to_string(e),
                                          g.arcs[e].tail, nl[e]);
    }
    detail::snap_leaves(g, anti);
    for (Index e = 0; e < g.num_arcs(); ++e) {
        out.arcs[e].c_lo_limit = anti.tail_limit[e];
        out.arcs[e].c_hi_limit = anti.head_limit[e];
    }
    return out;
}

}  // namespace casimir
