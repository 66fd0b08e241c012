#pragma once

#include <numeric>
#include <vector>

#include "casimir/surface.hpp"

namespace casimir {

/// Disjoint sets with path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(Index n = 0) { reset(n); }

    void reset(Index n) {
        parent_.resize(n);
        size_.assign(n, 1);
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    Index find(Index x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<Index> parent_;
    std::vector<Index> size_;
};

}  // namespace casimir
