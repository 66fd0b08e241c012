#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "casimir/errors.hpp"
#include "casimir/surface.hpp"

namespace casimir::io {

namespace detail {

// Whitespace tokenizer that drops '#' comments.
class Tokens {
public:
    explicit Tokens(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no_;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) items_.push_back({tok, line_no_});
        }
    }

    bool done() const { return pos_ >= items_.size(); }
    std::size_t size() const { return items_.size(); }

    const std::string& peek() const {
        if (done()) throw ParseError("unexpected end of input");
        return items_[pos_].text;
    }

    std::string next_string() {
        const std::string& s = peek();
        ++pos_;
        return s;
    }

    double next_double() {
        const auto& item = current();
        ++pos_;
        return to_double(item.text, item.line);
    }

    long long next_int() {
        const auto& item = current();
        ++pos_;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item.text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.text.size())
            throw ParseError("line " + std::to_string(item.line) + ": expected integer, got '" + item.text + "'");
        return v;
    }

    static double to_double(const std::string& text, int line) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || !std::isfinite(v))
            throw ParseError("line " + std::to_string(line) + ": expected real, got '" + text + "'");
        return v;
    }

private:
    struct Item {
        std::string text;
        int line;
    };
    const Item& current() const {
        if (done()) throw ParseError("unexpected end of input");
        return items_[pos_];
    }
    std::vector<Item> items_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
};

inline std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

struct MeshData {
    std::vector<Point3> positions;
    std::vector<Triangle> triangles;
};

/// ASCII OFF reader. Only triangular faces are accepted.
inline MeshData read_off(std::istream& in) {
    detail::Tokens tok(in);
    const std::string header = tok.next_string();
    if (header != "OFF") throw ParseError("missing OFF header");
    const long long nv = tok.next_int();
    const long long nf = tok.next_int();
    tok.next_int();  // edge count, unused
    if (nv <= 0 || nf <= 0) throw ParseError("OFF header must declare positive vertex and face counts");
    MeshData mesh;
    mesh.positions.resize(nv);
    for (auto& p : mesh.positions)
        for (double& c : p) c = tok.next_double();
    mesh.triangles.resize(nf);
    for (long long f = 0; f < nf; ++f) {
        const long long k = tok.next_int();
        if (k != 3) throw ParseError("face " + std::to_string(f) + " is not a triangle");
        for (Index& v : mesh.triangles[f]) {
            const long long idx = tok.next_int();
            if (idx < 0 || idx >= nv) throw ParseError("face " + std::to_string(f) + " vertex index out of range");
            v = static_cast<Index>(idx);
        }
    }
    if (!tok.done()) throw ParseError("trailing data after OFF faces");
    return mesh;
}

inline MeshData read_off(const std::string& path) {
    auto in = detail::open(path);
    return read_off(in);
}

/// One real per non-empty line.
inline std::vector<double> read_reals(std::istream& in) {
    detail::Tokens tok(in);
    std::vector<double> values;
    values.reserve(tok.size());
    while (!tok.done()) values.push_back(tok.next_double());
    return values;
}

inline std::vector<double> read_reals(const std::string& path) {
    auto in = detail::open(path);
    return read_reals(in);
}

/// One-form file: lines "u v value", one per mesh edge.
inline std::vector<std::tuple<Index, Index, double>> read_form(std::istream& in) {
    detail::Tokens tok(in);
    std::vector<std::tuple<Index, Index, double>> rows;
    while (!tok.done()) {
        const auto u = tok.next_int();
        const auto v = tok.next_int();
        const double w = tok.next_double();
        rows.emplace_back(static_cast<Index>(u), static_cast<Index>(v), w);
    }
    return rows;
}

inline std::vector<std::tuple<Index, Index, double>> read_form(const std::string& path) {
    auto in = detail::open(path);
    return read_form(in);
}

/// Surface from mesh plus optional per-triangle area override.
inline TriangulatedSurface make_surface(MeshData mesh, const std::vector<double>* areas = nullptr) {
    if (areas) return TriangulatedSurface(std::move(mesh.positions), std::move(mesh.triangles), *areas);
    return TriangulatedSurface(std::move(mesh.positions), std::move(mesh.triangles));
}

inline void write_off(std::ostream& out, const TriangulatedSurface& s) {
    out << "OFF\n" << s.num_vertices() << ' ' << s.num_triangles() << ' ' << s.num_edges() << '\n';
    out << std::setprecision(17);
    if (s.has_positions()) {
        for (const auto& p : s.positions()) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    } else {
        for (Index v = 0; v < s.num_vertices(); ++v) out << "0 0 0\n";
    }
    for (const auto& t : s.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void write_reals(std::ostream& out, const std::vector<double>& values) {
    out << std::setprecision(17);
    for (double v : values) out << v << '\n';
}

}  // namespace casimir::io
