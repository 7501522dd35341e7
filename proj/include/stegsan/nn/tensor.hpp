#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace stegsan::nn {

// Dense row-major tensor of doubles. Shapes used in this project are
// (C,H,W) for images, (C,L) for 1-D signals, and (N) for vectors.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(numel_of(shape), 0.0);
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("Tensor: non-positive dim");
            n *= static_cast<std::size_t>(d);
        }
        return s.empty() ? 0 : n;
    }

    std::size_t numel() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline Tensor zeros_like(const Tensor& t) {
    Tensor out;
    out.shape = t.shape;
    out.v.assign(t.v.size(), 0.0);
    return out;
}

}  // namespace stegsan::nn
