#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/errors.hpp"
#include "casimir/surface.hpp"
#include "casimir/union_find.hpp"

namespace casimir {

enum class VertexKind { Regular, Min, Max, Saddle };

inline const char* to_string(VertexKind k) {
    switch (k) {
        case VertexKind::Regular: return "regular";
        case VertexKind::Min: return "min";
        case VertexKind::Max: return "max";
        case VertexKind::Saddle: return "saddle";
    }
    return "?";
}

struct VertexClass {
    VertexKind kind = VertexKind::Regular;
    int multiplicity = 0;  // saddles only
};

/// Per-vertex scalar field with its PL classification. Ties are broken by
/// vertex index: u precedes v iff (F(u), u) < (F(v), v).
struct MorseField {
    std::vector<double> values;
    std::vector<VertexClass> classes;
    std::vector<Index> order;  // vertices sorted by (value, index)
    std::vector<Index> rank;   // inverse of order

    bool below(Index u, Index v) const { return rank[u] < rank[v]; }
    bool is_critical(Index v) const { return classes[v].kind != VertexKind::Regular; }
    double min_value() const { return values[order.front()]; }
    double max_value() const { return values[order.back()]; }
};

/// Number of lower-link components of v; -1 when the whole link is lower.
inline int lower_link_components(const TriangulatedSurface& s, const std::vector<Index>& rank, Index v) {
    const auto link = s.link(v);
    const std::size_t n = link.size();
    std::size_t lower = 0, starts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool cur = rank[link[i]] < rank[v];
        const bool prev = rank[link[(i + n - 1) % n]] < rank[v];
        if (cur) ++lower;
        if (cur && !prev) ++starts;
    }
    if (lower == n) return -1;
    return static_cast<int>(starts);
}

inline MorseField classify_vertices(const TriangulatedSurface& s, std::vector<double> values) {
    const Index nv = s.num_vertices();
    if (static_cast<Index>(values.size()) != nv)
        throw CountMismatch("field has " + std::to_string(values.size()) + " values for " + std::to_string(nv) +
                            " vertices");
    for (double v : values)
        if (!std::isfinite(v)) throw ParseError("field contains a non-finite value");

    MorseField f;
    f.values = std::move(values);
    f.order.resize(nv);
    std::iota(f.order.begin(), f.order.end(), 0);
    std::sort(f.order.begin(), f.order.end(), [&](Index a, Index b) {
        return f.values[a] < f.values[b] || (f.values[a] == f.values[b] && a < b);
    });
    f.rank.resize(nv);
    for (Index i = 0; i < nv; ++i) f.rank[f.order[i]] = i;

    f.classes.resize(nv);
    int minima = 0, maxima = 0, saddle_sum = 0;
    for (Index v = 0; v < nv; ++v) {
        const int c = lower_link_components(s, f.rank, v);
        VertexClass& vc = f.classes[v];
        if (c == -1) {
            vc.kind = VertexKind::Max;
            ++maxima;
        } else if (c == 0) {
            vc.kind = VertexKind::Min;
            ++minima;
        } else if (c == 1) {
            vc.kind = VertexKind::Regular;
        } else {
            vc.kind = VertexKind::Saddle;
            vc.multiplicity = c - 1;
            saddle_sum += c - 1;
        }
    }
    if (minima + maxima - saddle_sum != s.euler_characteristic())
        throw std::logic_error("PL Poincare-Hopf identity violated");
    return f;
}

struct CriticalCounts {
    int minima = 0;
    int maxima = 0;
    int saddles = 0;
    int saddle_multiplicity = 0;
};

inline CriticalCounts count_critical(const MorseField& f) {
    CriticalCounts c;
    for (const auto& vc : f.classes) {
        switch (vc.kind) {
            case VertexKind::Min: ++c.minima; break;
            case VertexKind::Max: ++c.maxima; break;
            case VertexKind::Saddle:
                ++c.saddles;
                c.saddle_multiplicity += vc.multiplicity;
                break;
            default: break;
        }
    }
    return c;
}

enum class ViolationKind { DegenerateSaddle, SharedCriticalValue, NonDistinctValues };

inline const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DegenerateSaddle: return "DegenerateSaddle";
        case ViolationKind::SharedCriticalValue: return "SharedCriticalValue";
        case ViolationKind::NonDistinctValues: return "NonDistinctValues";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    Index a;
    Index b = -1;  // second vertex for pairwise violations
    double value;
};

/// Certificate when violations is empty; otherwise the violation report.
struct SimplicityReport {
    std::vector<Index> critical;  // sorted by (value, index)
    std::vector<Violation> violations;

    bool simple() const { return violations.empty(); }
    std::string describe() const {
        constexpr std::size_t shown = 20;
        std::string out;
        for (std::size_t i = 0; i < violations.size() && i < shown; ++i) {
            const auto& v = violations[i];
            out += to_string(v.kind);
            out += " at vertex " + std::to_string(v.a);
            if (v.b >= 0) out += " and " + std::to_string(v.b);
            out += " (value " + std::to_string(v.value) + ")\n";
        }
        if (violations.size() > shown) out += "and " + std::to_string(violations.size() - shown) + " more\n";
        return out;
    }
};

inline SimplicityReport certify_simple(const MorseField& f, const TriangulatedSurface& s) {
    SimplicityReport r;
    for (Index v : f.order)
        if (f.is_critical(v)) r.critical.push_back(v);

    for (Index v : r.critical)
        if (f.classes[v].kind == VertexKind::Saddle && f.classes[v].multiplicity > 1)
            r.violations.push_back({ViolationKind::DegenerateSaddle, v, -1, f.values[v]});

    // Groups of critical vertices sharing a value.
    std::size_t i = 0;
    while (i < r.critical.size()) {
        std::size_t j = i + 1;
        const double c = f.values[r.critical[i]];
        while (j < r.critical.size() && f.values[r.critical[j]] == c) ++j;
        if (j - i > 1) {
            // Connected components of the exact level set {F = c}: nodes are
            // vertices with value c and edges strictly straddling c; all
            // level points inside one triangle are connected.
            const Index nv = s.num_vertices();
            UnionFind uf(nv + s.num_edges());
            for (Index t = 0; t < s.num_triangles(); ++t) {
                const Triangle& tri = s.triangles()[t];
                const auto& te = s.triangle_edges(t);
                Index first = -1;
                auto add = [&](Index node) {
                    if (first < 0) first = node;
                    else uf.unite(first, node);
                };
                for (int k = 0; k < 3; ++k) {
                    if (f.values[tri[k]] == c) add(tri[k]);
                    const double a = f.values[tri[k]], b = f.values[tri[(k + 1) % 3]];
                    if ((a < c && b > c) || (a > c && b < c)) add(nv + te[k].edge);
                }
            }
            for (std::size_t p = i; p < j; ++p) {
                for (std::size_t q = p + 1; q < j; ++q) {
                    const Index a = r.critical[p], b = r.critical[q];
                    const auto kind = uf.find(a) == uf.find(b) ? ViolationKind::SharedCriticalValue
                                                               : ViolationKind::NonDistinctValues;
                    r.violations.push_back({kind, a, b, c});
                }
            }
        }
        i = j;
    }
    return r;
}

/// Throws NotSimple with the violation list unless f is simple.
inline SimplicityReport require_simple(const MorseField& f, const TriangulatedSurface& s) {
    auto r = certify_simple(f, s);
    if (!r.simple()) throw NotSimple(r.describe());
    return r;
}

/// Spreads every group of tied values by at most eps while keeping the
/// (value, index) order, so the classification is unchanged. With
/// tie_tol > 0, values within tie_tol * range of their predecessor are
/// first snapped to one value, which orders near-ties by index.
inline MorseField perturb_to_simple(const MorseField& f, const TriangulatedSurface& s, double eps = -1.0,
                                    double tie_tol = 0.0) {
    if (tie_tol > 0.0) {
        const double tol = tie_tol * (f.max_value() - f.min_value());
        std::vector<double> snapped = f.values;
        bool changed = false;
        double base = f.values[f.order[0]], prev = base;
        for (std::size_t i = 1; i < f.order.size(); ++i) {
            const double x = f.values[f.order[i]];
            if (x - prev <= tol) {
                snapped[f.order[i]] = base;
                changed = changed || x != base;
            } else {
                base = x;
            }
            prev = x;
        }
        if (changed) return perturb_to_simple(classify_vertices(s, std::move(snapped)), s, eps);
    }
    for (Index v = 0; v < s.num_vertices(); ++v) {
        if (f.classes[v].kind == VertexKind::Saddle && f.classes[v].multiplicity > 1)
            throw PerturbFailure("vertex " + std::to_string(v) + " is a saddle of multiplicity " +
                                 std::to_string(f.classes[v].multiplicity));
    }
    const double range = f.max_value() - f.min_value();
    if (eps < 0.0) eps = 1e-9 * (range > 0.0 ? range : 1.0);

    const auto& ord = f.order;
    const std::size_t n = ord.size();
    bool ties = false;
    for (std::size_t i = 1; i < n && !ties; ++i) ties = f.values[ord[i]] == f.values[ord[i - 1]];
    if (!ties) return f;

    std::vector<double> out = f.values;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        const double c = f.values[ord[i]];
        while (j < n && f.values[ord[j]] == c) ++j;
        if (j - i > 1) {
            const double gap = j < n ? f.values[ord[j]] - c : eps;
            const double step = std::min(eps, 0.5 * gap) / static_cast<double>(j - i);
            double prev = c;
            for (std::size_t k = i + 1; k < j; ++k) {
                double nv = c + static_cast<double>(k - i) * step;
                if (nv <= prev) nv = std::nextafter(prev, std::numeric_limits<double>::infinity());
                out[ord[k]] = nv;
                prev = nv;
            }
            if (j < n && prev >= f.values[ord[j]])
                throw PerturbFailure("cannot separate tied values at " + std::to_string(c));
        }
        i = j;
    }
    return classify_vertices(s, std::move(out));
}

}  // namespace casimir
