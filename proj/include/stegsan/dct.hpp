#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "stegsan/image.hpp"

namespace stegsan {

namespace detail {

// Orthonormal DCT-II basis matrix for size n: B[k][i] = s_k cos(pi(2i+1)k/2n),
// s_0 = sqrt(1/n), s_k = sqrt(2/n). Rows are orthonormal, so the inverse
// transform is the transpose and Parseval holds exactly.
inline const std::vector<double>& dct_basis(int n) {
    static std::map<int, std::vector<double>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> b(static_cast<std::size_t>(n) * n);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k) {
        double s = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int i = 0; i < n; ++i)
            b[static_cast<std::size_t>(k) * n + i] = s * std::cos(pi * (2 * i + 1) * k / (2.0 * n));
    }
    return cache.emplace(n, std::move(b)).first->second;
}

}  // namespace detail

// 2-D orthonormal DCT-II of one channel plane (height x width, row-major).
inline std::vector<double> dct2(const std::vector<double>& plane, int height, int width) {
    const auto& bh = detail::dct_basis(height);
    const auto& bw = detail::dct_basis(width);
    // rows first
    std::vector<double> tmp(plane.size(), 0.0);
    for (int y = 0; y < height; ++y)
        for (int k = 0; k < width; ++k) {
            double acc = 0.0;
            for (int x = 0; x < width; ++x)
                acc += bw[static_cast<std::size_t>(k) * width + x] * plane[static_cast<std::size_t>(y) * width + x];
            tmp[static_cast<std::size_t>(y) * width + k] = acc;
        }
    std::vector<double> out(plane.size(), 0.0);
    for (int k = 0; k < height; ++k)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int y = 0; y < height; ++y)
                acc += bh[static_cast<std::size_t>(k) * height + y] * tmp[static_cast<std::size_t>(y) * width + x];
            out[static_cast<std::size_t>(k) * width + x] = acc;
        }
    return out;
}

// Inverse of dct2 (2-D DCT-III with the same orthonormal scaling).
inline std::vector<double> idct2(const std::vector<double>& coeffs, int height, int width) {
    const auto& bh = detail::dct_basis(height);
    const auto& bw = detail::dct_basis(width);
    std::vector<double> tmp(coeffs.size(), 0.0);
    for (int k = 0; k < height; ++k)
        for (int x = 0; x < width; ++x) {
            // transpose multiply along the column axis
            for (int y = 0; y < height; ++y)
                tmp[static_cast<std::size_t>(y) * width + x] +=
                    bh[static_cast<std::size_t>(k) * height + y] * coeffs[static_cast<std::size_t>(k) * width + x];
        }
    std::vector<double> out(coeffs.size(), 0.0);
    for (int y = 0; y < height; ++y)
        for (int k = 0; k < width; ++k) {
            double v = tmp[static_cast<std::size_t>(y) * width + k];
            for (int x = 0; x < width; ++x)
                out[static_cast<std::size_t>(y) * width + x] +=
                    bw[static_cast<std::size_t>(k) * width + x] * v;
        }
    return out;
}

}  // namespace stegsan
