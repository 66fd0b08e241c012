#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

namespace casimir {

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
template <class Real = double>
struct GaussLegendre {
    std::vector<Real> nodes;
    std::vector<Real> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            Real x = std::cos(std::numbers::pi_v<Real> * (i + Real(0.75)) / (n + Real(0.5)));
            Real dp = 0;
            for (int it = 0; it < 100; ++it) {
                Real p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const Real pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                if (n == 1) p0 = 1;
                dp = n * (x * p1 - p0) / (x * x - 1);
                const Real dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < Real(1e-16)) break;
            }
            {
                Real p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const Real pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                if (n == 1) p0 = 1;
                dp = n * (x * p1 - p0) / (x * x - 1);
            }
            const Real w = 2 / ((1 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }

    /// Integral of fn over [a, b].
    template <class Fn>
    auto integrate(Fn&& fn, Real a, Real b) const {
        const Real half = (b - a) / 2, mid = (a + b) / 2;
        decltype(fn(mid)) sum{};
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * fn(mid + half * nodes[i]);
        return sum * half;
    }
};

/// Shared rule with n points, built once.
inline const GaussLegendre<double>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre<double>(n)).first;
    return it->second;
}

}  // namespace casimir
