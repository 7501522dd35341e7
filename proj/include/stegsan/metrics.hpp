#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stegsan/image.hpp"

namespace stegsan {

// Mean squared pixel difference on the [0,255] scale.
inline double mse(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

// 10*log10(max^2 / mse); +inf when mse == 0.
inline double psnr_from_mse(double mse_value, double max_value = 255.0) {
    if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value * max_value / mse_value);
}

inline double psnr(const ImageTensor& a, const ImageTensor& b, double max_value = 255.0) {
    return psnr_from_mse(mse(a, b), max_value);
}

namespace detail {

// 11x11 Gaussian window, sigma 1.5, normalized to sum 1.
inline const std::array<double, 121>& ssim_window() {
    static const std::array<double, 121> w = [] {
        std::array<double, 121> k{};
        double sum = 0.0;
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 11; ++x) {
                double dy = y - 5.0, dx = x - 5.0;
                k[y * 11 + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
                sum += k[y * 11 + x];
            }
        for (double& v : k) v /= sum;
        return k;
    }();
    return w;
}

}  // namespace detail

// Mean local SSIM: Gaussian window 11x11 sigma 1.5, K1=0.01, K2=0.03,
// L=255, windows fully inside the image, channels averaged.
inline double ssim(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    constexpr int kWin = 11;
    if (a.height < kWin || a.width < kWin)
        throw std::invalid_argument("ssim: image smaller than 11x11 window");

    constexpr double kL = 255.0;
    constexpr double kC1 = (0.01 * kL) * (0.01 * kL);
    constexpr double kC2 = (0.03 * kL) * (0.03 * kL);
    const auto& win = detail::ssim_window();

    double total = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        double channel_sum = 0.0;
        int count = 0;
        for (int y0 = 0; y0 + kWin <= a.height; ++y0) {
            for (int x0 = 0; x0 + kWin <= a.width; ++x0) {
                double mu_a = 0.0, mu_b = 0.0;
                for (int y = 0; y < kWin; ++y)
                    for (int x = 0; x < kWin; ++x) {
                        double w = win[y * kWin + x];
                        mu_a += w * a.at(c, y0 + y, x0 + x);
                        mu_b += w * b.at(c, y0 + y, x0 + x);
                    }
                double va = 0.0, vb = 0.0, vab = 0.0;
                for (int y = 0; y < kWin; ++y)
                    for (int x = 0; x < kWin; ++x) {
                        double w = win[y * kWin + x];
                        double da = a.at(c, y0 + y, x0 + x) - mu_a;
                        double db = b.at(c, y0 + y, x0 + x) - mu_b;
                        va += w * da * da;
                        vb += w * db * db;
                        vab += w * da * db;
                    }
                double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * vab + kC2);
                double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (va + vb + kC2);
                channel_sum += num / den;
                ++count;
            }
        }
        total += channel_sum / count;
    }
    return total / a.channels;
}

// Pearson correlation over all pixels and channels, in [-1,1].
// Undefined (nullopt) when either image is constant.
inline std::optional<double> ncc(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ncc: shape mismatch");
    const std::size_t n = a.data.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a.data[i];
        mean_b += b.data[i];
    }
    mean_a /= n;
    mean_b /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a.data[i] - mean_a;
        double db = b.data[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

// NCC over arbitrary value sequences (audio, float images).
inline std::optional<double> ncc_values(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("ncc_values: length mismatch");
    const std::size_t n = a.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a[i] - mean_a;
        double db = b[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

// Bit error rate: mismatch fraction between equally long bit sequences.
inline double ber(const std::vector<std::uint8_t>& bits_a, const std::vector<std::uint8_t>& bits_b) {
    if (bits_a.size() != bits_b.size()) throw std::invalid_argument("ber: length mismatch");
    if (bits_a.empty()) throw std::invalid_argument("ber: empty bitstreams");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < bits_a.size(); ++i)
        if ((bits_a[i] != 0) != (bits_b[i] != 0)) ++mismatches;
    return static_cast<double>(mismatches) / static_cast<double>(bits_a.size());
}

// Removal rate: RR = 1 - |2*BER - 1|, maximal at BER = 0.5.
inline double rr(double ber_value) {
    if (ber_value < 0.0 || ber_value > 1.0) throw std::invalid_argument("rr: BER outside [0,1]");
    return 1.0 - std::fabs(2.0 * ber_value - 1.0);
}

// Joint image-preservation / secret-elimination verdict.
struct Verdict {
    bool ip_success = false;
    bool se_success = false;
    double theta_ip = 0.95;
    double theta_se = 0.30;

    bool overall() const { return ip_success && se_success; }
};

inline Verdict verdict(double ncc_ip, double ncc_se, double theta_ip = 0.95,
                       double theta_se = 0.30) {
    Verdict v;
    v.theta_ip = theta_ip;
    v.theta_se = theta_se;
    v.ip_success = ncc_ip >= theta_ip;
    v.se_success = ncc_se <= theta_se;
    return v;
}

// One IP/SE metric quadruple pair, as reported per sanitization.
struct MetricReport {
    double mse_ip = 0.0, psnr_ip = 0.0, ssim_ip = 0.0, ncc_ip = 0.0;
    double mse_se = 0.0, psnr_se = 0.0, ssim_se = 0.0, ncc_se = 0.0;
};

inline MetricReport metric_report(const ImageTensor& cover, const ImageTensor& sanitized,
                                  const ImageTensor& secret, const ImageTensor& revealed_after) {
    MetricReport r;
    r.mse_ip = mse(cover, sanitized);
    r.psnr_ip = psnr_from_mse(r.mse_ip);
    r.ssim_ip = ssim(cover, sanitized);
    r.ncc_ip = ncc(cover, sanitized).value_or(std::numeric_limits<double>::quiet_NaN());
    r.mse_se = mse(secret, revealed_after);
    r.psnr_se = psnr_from_mse(r.mse_se);
    r.ssim_se = ssim(secret, revealed_after);
    r.ncc_se = ncc(secret, revealed_after).value_or(std::numeric_limits<double>::quiet_NaN());
    return r;
}

}  // namespace stegsan
