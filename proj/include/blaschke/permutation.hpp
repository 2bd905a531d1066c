#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace blaschke {

/// Permutation of {0, .., n-1} stored as its image table.
struct Permutation {
    std::vector<int> im;

    Permutation() = default;
    explicit Permutation(std::vector<int> images) : im(std::move(images)) {
        std::vector<char> seen(im.size(), 0);
        for (int v : im) {
            if (v < 0 || static_cast<std::size_t>(v) >= im.size() || seen[v])
                throw spec_error("image table is not a permutation");
            seen[v] = 1;
        }
    }

    static Permutation identity(std::size_t n) {
        std::vector<int> v(n);
        std::iota(v.begin(), v.end(), 0);
        return Permutation(std::move(v));
    }

    std::size_t size() const { return im.size(); }
    int operator()(int i) const { return im[static_cast<std::size_t>(i)]; }

    bool is_identity() const {
        for (std::size_t i = 0; i < im.size(); ++i)
            if (im[i] != static_cast<int>(i)) return false;
        return true;
    }

    /// (a * b)(i) = a(b(i)): b acts first.
    friend Permutation operator*(const Permutation& a, const Permutation& b) {
        if (a.size() != b.size()) throw spec_error("permutation size mismatch");
        std::vector<int> v(a.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = a.im[static_cast<std::size_t>(b.im[i])];
        Permutation r;
        r.im = std::move(v);  // already a valid table, skip re-validation
        return r;
    }

    Permutation inverse() const {
        std::vector<int> v(im.size());
        for (std::size_t i = 0; i < im.size(); ++i)
            v[static_cast<std::size_t>(im[i])] = static_cast<int>(i);
        Permutation r;
        r.im = std::move(v);
        return r;
    }

    std::vector<std::vector<int>> cycles() const {
        std::vector<std::vector<int>> out;
        std::vector<char> seen(im.size(), 0);
        for (std::size_t i = 0; i < im.size(); ++i) {
            if (seen[i]) continue;
            std::vector<int> cyc;
            int j = static_cast<int>(i);
            while (!seen[j]) {
                seen[j] = 1;
                cyc.push_back(j);
                j = im[static_cast<std::size_t>(j)];
            }
            out.push_back(std::move(cyc));
        }
        return out;
    }

    bool operator==(const Permutation& o) const { return im == o.im; }
    bool operator<(const Permutation& o) const { return im < o.im; }
};

struct PermutationHash {
    std::size_t operator()(const Permutation& p) const {
        std::size_t h = p.im.size();
        for (int v : p.im)
            h = h * 1000003u + static_cast<std::size_t>(v) + 0x9e3779b9u + (h << 6) + (h >> 2);
        return h;
    }
};

} // namespace blaschke
