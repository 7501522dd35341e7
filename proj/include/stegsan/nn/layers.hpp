#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::nn {

// Weights and their accumulated gradient, updated together by the optimizer.
struct Param {
    std::vector<double> w;
    std::vector<double> g;

    void resize(std::size_t n) {
        w.assign(n, 0.0);
        g.assign(n, 0.0);
    }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

inline void he_init(Param& p, std::size_t fan_in, SeededRng& rng, double scale = 1.0) {
    double stddev = scale * std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& w : p.w) w = rng.normal(0.0, stddev);
}

// ---------------------------------------------------------------------------
// 2-D convolution, square kernel, zero padding.
// ---------------------------------------------------------------------------
struct Conv2d {
    int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
    Param weight;  // [out_c][in_c][k][k]
    Param bias;    // [out_c]
    Tensor x_cache;
    std::vector<double> col_cache;

    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, int kernel, int stride_, int pad_)
        : in_c(in_channels), out_c(out_channels), k(kernel), stride(stride_), pad(pad_) {
        weight.resize(static_cast<std::size_t>(out_c) * in_c * k * k);
        bias.resize(static_cast<std::size_t>(out_c));
    }

    void init(SeededRng& rng, double scale = 1.0) {
        he_init(weight, static_cast<std::size_t>(in_c) * k * k, rng, scale);
    }
    void init_zero() {
        std::fill(weight.w.begin(), weight.w.end(), 0.0);
        std::fill(bias.w.begin(), bias.w.end(), 0.0);
    }

    int out_dim(int in) const { return (in + 2 * pad - k) / stride + 1; }

    // im2col layout: row q = (i*k + ky)*k + kx holds the input values seen
    // by kernel tap (i,ky,kx) at every output position p = yo*wo + xo. The
    // convolution is then a (out_c x Q) x (Q x P) product whose inner loops
    // run over P contiguous doubles, which vectorizes well even at 16x16.
    Tensor forward(const Tensor& x) {
        if (static_cast<int>(x.shape.size()) != 3 || x.shape[0] != in_c)
            throw std::invalid_argument("Conv2d: bad input shape");
        x_cache = x;
        const int h = x.shape[1], w = x.shape[2];
        const int ho = out_dim(h), wo = out_dim(w);
        const int q_dim = in_c * k * k;
        const int p_dim = ho * wo;

        col_cache.assign(static_cast<std::size_t>(q_dim) * p_dim, 0.0);
        for (int i = 0; i < in_c; ++i) {
            const double* xp = x.v.data() + static_cast<std::size_t>(i) * h * w;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    double* crow = col_cache.data() +
                                   (static_cast<std::size_t>(i) * k * k + ky * k + kx) * p_dim;
                    for (int yo = 0; yo < ho; ++yo) {
                        const int yi = yo * stride + ky - pad;
                        if (yi < 0 || yi >= h) continue;
                        const double* xr = xp + static_cast<std::size_t>(yi) * w;
                        double* cr = crow + static_cast<std::size_t>(yo) * wo;
                        const int xo_lo = std::max(0, (pad - kx + stride - 1) / stride);
                        const int xo_hi = std::min(wo - 1, (w - 1 - kx + pad) / stride);
                        if (stride == 1) {
                            const double* xb = xr + kx - pad;
                            for (int xo = xo_lo; xo <= xo_hi; ++xo) cr[xo] = xb[xo];
                        } else {
                            for (int xo = xo_lo; xo <= xo_hi; ++xo)
                                cr[xo] = xr[xo * stride + kx - pad];
                        }
                    }
                }
        }

        Tensor y({out_c, ho, wo});
        for (int o = 0; o < out_c; ++o) {
            double* __restrict__ yr = y.v.data() + static_cast<std::size_t>(o) * p_dim;
            std::fill_n(yr, p_dim, bias.w[o]);
            const double* wrow = weight.w.data() + static_cast<std::size_t>(o) * q_dim;
            for (int q = 0; q < q_dim; ++q) {
                const double wv = wrow[q];
                const double* __restrict__ cr = col_cache.data() + static_cast<std::size_t>(q) * p_dim;
                for (int p = 0; p < p_dim; ++p) yr[p] += wv * cr[p];
            }
        }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const Tensor& x = x_cache;
        const int h = x.shape[1], w = x.shape[2];
        const int ho = gy.shape[1], wo = gy.shape[2];
        const int q_dim = in_c * k * k;
        const int p_dim = ho * wo;

        // bias and weight gradients from the cached column matrix
        for (int o = 0; o < out_c; ++o) {
            const double* __restrict__ gr = gy.v.data() + static_cast<std::size_t>(o) * p_dim;
            double gb = 0.0;
            for (int p = 0; p < p_dim; ++p) gb += gr[p];
            bias.g[o] += gb;
            double* gwrow = weight.g.data() + static_cast<std::size_t>(o) * q_dim;
            for (int q = 0; q < q_dim; ++q) {
                const double* __restrict__ cr =
                    col_cache.data() + static_cast<std::size_t>(q) * p_dim;
                // four-lane accumulation: fixed order, SLP-vectorizable
                double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
                int p = 0;
                for (; p + 4 <= p_dim; p += 4) {
                    a0 += cr[p] * gr[p];
                    a1 += cr[p + 1] * gr[p + 1];
                    a2 += cr[p + 2] * gr[p + 2];
                    a3 += cr[p + 3] * gr[p + 3];
                }
                double tail = 0;
                for (; p < p_dim; ++p) tail += cr[p] * gr[p];
                gwrow[q] += ((a0 + a1) + (a2 + a3)) + tail;
            }
        }

        // gx via the transposed product, accumulated in column space first
        std::vector<double> gcol(static_cast<std::size_t>(q_dim) * p_dim, 0.0);
        for (int o = 0; o < out_c; ++o) {
            const double* __restrict__ gr = gy.v.data() + static_cast<std::size_t>(o) * p_dim;
            const double* wrow = weight.w.data() + static_cast<std::size_t>(o) * q_dim;
            for (int q = 0; q < q_dim; ++q) {
                const double wv = wrow[q];
                double* __restrict__ gc = gcol.data() + static_cast<std::size_t>(q) * p_dim;
                for (int p = 0; p < p_dim; ++p) gc[p] += wv * gr[p];
            }
        }
        Tensor gx = zeros_like(x);
        for (int i = 0; i < in_c; ++i) {
            double* gxp = gx.v.data() + static_cast<std::size_t>(i) * h * w;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const double* gc = gcol.data() +
                                       (static_cast<std::size_t>(i) * k * k + ky * k + kx) * p_dim;
                    for (int yo = 0; yo < ho; ++yo) {
                        const int yi = yo * stride + ky - pad;
                        if (yi < 0 || yi >= h) continue;
                        double* gxr = gxp + static_cast<std::size_t>(yi) * w;
                        const double* gcr = gc + static_cast<std::size_t>(yo) * wo;
                        const int xo_lo = std::max(0, (pad - kx + stride - 1) / stride);
                        const int xo_hi = std::min(wo - 1, (w - 1 - kx + pad) / stride);
                        if (stride == 1) {
                            double* gxb = gxr + kx - pad;
                            for (int xo = xo_lo; xo <= xo_hi; ++xo) gxb[xo] += gcr[xo];
                        } else {
                            for (int xo = xo_lo; xo <= xo_hi; ++xo)
                                gxr[xo * stride + kx - pad] += gcr[xo];
                        }
                    }
                }
        }
        return gx;
    }

    void params(std::vector<Param*>& ps) {
        ps.push_back(&weight);
        ps.push_back(&bias);
    }
};

// ---------------------------------------------------------------------------
// 1-D convolution over (C, L).
// ---------------------------------------------------------------------------
struct Conv1d {
    int in_c = 0, out_c = 0, k = 9, stride = 1, pad = 4;
    Param weight;  // [out_c][in_c][k]
    Param bias;
    Tensor x_cache;

    Conv1d() = default;
    Conv1d(int in_channels, int out_channels, int kernel, int stride_, int pad_)
        : in_c(in_channels), out_c(out_channels), k(kernel), stride(stride_), pad(pad_) {
        weight.resize(static_cast<std::size_t>(out_c) * in_c * k);
        bias.resize(static_cast<std::size_t>(out_c));
    }

    void init(SeededRng& rng, double scale = 1.0) {
        he_init(weight, static_cast<std::size_t>(in_c) * k, rng, scale);
    }
    void init_zero() {
        std::fill(weight.w.begin(), weight.w.end(), 0.0);
        std::fill(bias.w.begin(), bias.w.end(), 0.0);
    }

    int out_dim(int in) const { return (in + 2 * pad - k) / stride + 1; }

    Tensor forward(const Tensor& x) {
        if (static_cast<int>(x.shape.size()) != 2 || x.shape[0] != in_c)
            throw std::invalid_argument("Conv1d: bad input shape");
        x_cache = x;
        const int n = x.shape[1];
        const int no = out_dim(n);
        Tensor y({out_c, no});
        for (int o = 0; o < out_c; ++o) {
            double* yp = y.v.data() + static_cast<std::size_t>(o) * no;
            std::fill_n(yp, no, bias.w[o]);
            for (int i = 0; i < in_c; ++i) {
                const double* xp = x.v.data() + static_cast<std::size_t>(i) * n;
                const double* wrow = weight.w.data() + (static_cast<std::size_t>(o) * in_c + i) * k;
                for (int kx = 0; kx < k; ++kx) {
                    double wv = wrow[kx];
                    int lo = std::max(0, (pad - kx + stride - 1) / stride);
                    int hi = std::min(no - 1, (n - 1 - kx + pad) / stride);
                    for (int j = lo; j <= hi; ++j) yp[j] += wv * xp[j * stride + kx - pad];
                }
            }
        }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const Tensor& x = x_cache;
        const int n = x.shape[1];
        const int no = gy.shape[1];
        Tensor gx = zeros_like(x);
        for (int o = 0; o < out_c; ++o) {
            const double* gp = gy.v.data() + static_cast<std::size_t>(o) * no;
            double gb = 0.0;
            for (int j = 0; j < no; ++j) gb += gp[j];
            bias.g[o] += gb;
            for (int i = 0; i < in_c; ++i) {
                const double* xp = x.v.data() + static_cast<std::size_t>(i) * n;
                double* gxp = gx.v.data() + static_cast<std::size_t>(i) * n;
                const double* wrow = weight.w.data() + (static_cast<std::size_t>(o) * in_c + i) * k;
                double* gwrow = weight.g.data() + (static_cast<std::size_t>(o) * in_c + i) * k;
                for (int kx = 0; kx < k; ++kx) {
                    double wv = wrow[kx];
                    double gw = 0.0;
                    int lo = std::max(0, (pad - kx + stride - 1) / stride);
                    int hi = std::min(no - 1, (n - 1 - kx + pad) / stride);
                    for (int j = lo; j <= hi; ++j) {
                        int xi = j * stride + kx - pad;
                        gw += xp[xi] * gp[j];
                        gxp[xi] += wv * gp[j];
                    }
                    gwrow[kx] += gw;
                }
            }
        }
        return gx;
    }

    void params(std::vector<Param*>& ps) {
        ps.push_back(&weight);
        ps.push_back(&bias);
    }
};

// ---------------------------------------------------------------------------
// Fully connected layer on flat vectors.
// ---------------------------------------------------------------------------
struct Linear {
    int in_n = 0, out_n = 0;
    Param weight;  // [out][in]
    Param bias;
    Tensor x_cache;

    Linear() = default;
    Linear(int in, int out) : in_n(in), out_n(out) {
        weight.resize(static_cast<std::size_t>(out) * in);
        bias.resize(static_cast<std::size_t>(out));
    }

    void init(SeededRng& rng, double scale = 1.0) { he_init(weight, in_n, rng, scale); }

    Tensor forward(const Tensor& x) {
        if (static_cast<int>(x.numel()) != in_n) throw std::invalid_argument("Linear: bad input");
        x_cache = x;
        Tensor y({out_n});
        for (int o = 0; o < out_n; ++o) {
            const double* wr = weight.w.data() + static_cast<std::size_t>(o) * in_n;
            double acc = bias.w[o];
            for (int i = 0; i < in_n; ++i) acc += wr[i] * x.v[i];
            y.v[o] = acc;
        }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        Tensor gx = zeros_like(x_cache);
        for (int o = 0; o < out_n; ++o) {
            double g = gy.v[o];
            bias.g[o] += g;
            const double* wr = weight.w.data() + static_cast<std::size_t>(o) * in_n;
            double* gwr = weight.g.data() + static_cast<std::size_t>(o) * in_n;
            for (int i = 0; i < in_n; ++i) {
                gwr[i] += g * x_cache.v[i];
                gx.v[i] += g * wr[i];
            }
        }
        return gx;
    }

    void params(std::vector<Param*>& ps) {
        ps.push_back(&weight);
        ps.push_back(&bias);
    }
};

// ---------------------------------------------------------------------------
// Elementwise activations.
// ---------------------------------------------------------------------------
struct SiLU {
    Tensor x_cache;

    Tensor forward(const Tensor& x) {
        x_cache = x;
        Tensor y = x;
        for (double& v : y.v) v = v / (1.0 + std::exp(-v));
        return y;
    }
    Tensor backward(const Tensor& gy) {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.v.size(); ++i) {
            double s = 1.0 / (1.0 + std::exp(-x_cache.v[i]));
            gx.v[i] *= s * (1.0 + x_cache.v[i] * (1.0 - s));
        }
        return gx;
    }
};

struct Tanh {
    Tensor y_cache;

    Tensor forward(const Tensor& x) {
        Tensor y = x;
        for (double& v : y.v) v = std::tanh(v);
        y_cache = y;
        return y;
    }
    Tensor backward(const Tensor& gy) {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.v.size(); ++i)
            gx.v[i] *= 1.0 - y_cache.v[i] * y_cache.v[i];
        return gx;
    }
};

struct Sigmoid {
    Tensor y_cache;

    Tensor forward(const Tensor& x) {
        Tensor y = x;
        for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
        y_cache = y;
        return y;
    }
    Tensor backward(const Tensor& gy) {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.v.size(); ++i)
            gx.v[i] *= y_cache.v[i] * (1.0 - y_cache.v[i]);
        return gx;
    }
};

// ---------------------------------------------------------------------------
// Group normalization over (C, ...): channels are split into groups, each
// normalized to zero mean / unit variance over its channels and positions,
// then scaled and shifted per channel.
// ---------------------------------------------------------------------------
struct GroupNorm {
    int channels = 0, groups = 1;
    static constexpr double kEps = 1e-5;
    Param gamma, beta;
    Tensor x_cache;
    std::vector<double> mean_cache, inv_std_cache;

    GroupNorm() = default;
    explicit GroupNorm(int c, int g = 0) : channels(c), groups(g > 0 ? g : std::max(1, c / 8)) {
        if (channels % groups != 0)
            throw std::invalid_argument("GroupNorm: channels not divisible by groups");
        gamma.resize(static_cast<std::size_t>(channels));
        beta.resize(static_cast<std::size_t>(channels));
        std::fill(gamma.w.begin(), gamma.w.end(), 1.0);
    }

    Tensor forward(const Tensor& x) {
        if (x.shape.empty() || x.shape[0] != channels)
            throw std::invalid_argument("GroupNorm: bad input shape");
        x_cache = x;
        const std::size_t spatial = x.numel() / channels;
        const int cpg = channels / groups;
        const std::size_t group_n = spatial * static_cast<std::size_t>(cpg);
        mean_cache.assign(groups, 0.0);
        inv_std_cache.assign(groups, 0.0);
        Tensor y = x;
        for (int g = 0; g < groups; ++g) {
            const double* xs = x.v.data() + static_cast<std::size_t>(g) * group_n;
            double m = 0.0;
            for (std::size_t i = 0; i < group_n; ++i) m += xs[i];
            m /= static_cast<double>(group_n);
            double v = 0.0;
            for (std::size_t i = 0; i < group_n; ++i) v += (xs[i] - m) * (xs[i] - m);
            v /= static_cast<double>(group_n);
            double inv = 1.0 / std::sqrt(v + kEps);
            mean_cache[g] = m;
            inv_std_cache[g] = inv;
            for (int c = 0; c < cpg; ++c) {
                const int ch = g * cpg + c;
                double* yr = y.v.data() + static_cast<std::size_t>(ch) * spatial;
                const double* xr = x.v.data() + static_cast<std::size_t>(ch) * spatial;
                const double a = gamma.w[ch] * inv, b = beta.w[ch] - a * m;
                for (std::size_t i = 0; i < spatial; ++i) yr[i] = a * xr[i] + b;
            }
        }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const Tensor& x = x_cache;
        const std::size_t spatial = x.numel() / channels;
        const int cpg = channels / groups;
        const std::size_t group_n = spatial * static_cast<std::size_t>(cpg);
        Tensor gx = zeros_like(x);
        for (int g = 0; g < groups; ++g) {
            const double m = mean_cache[g], inv = inv_std_cache[g];
            // per-channel parameter grads and the two group-level reductions
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int c = 0; c < cpg; ++c) {
                const int ch = g * cpg + c;
                const double* xr = x.v.data() + static_cast<std::size_t>(ch) * spatial;
                const double* gr = gy.v.data() + static_cast<std::size_t>(ch) * spatial;
                double gsum = 0.0, gxhat = 0.0;
                for (std::size_t i = 0; i < spatial; ++i) {
                    const double xhat = (xr[i] - m) * inv;
                    gsum += gr[i];
                    gxhat += gr[i] * xhat;
                }
                beta.g[ch] += gsum;
                gamma.g[ch] += gxhat;
                sum_dxhat += gsum * gamma.w[ch];
                sum_dxhat_xhat += gxhat * gamma.w[ch];
            }
            const double inv_n = 1.0 / static_cast<double>(group_n);
            for (int c = 0; c < cpg; ++c) {
                const int ch = g * cpg + c;
                const double* xr = x.v.data() + static_cast<std::size_t>(ch) * spatial;
                const double* gr = gy.v.data() + static_cast<std::size_t>(ch) * spatial;
                double* gxr = gx.v.data() + static_cast<std::size_t>(ch) * spatial;
                const double gch = gamma.w[ch];
                for (std::size_t i = 0; i < spatial; ++i) {
                    const double xhat = (xr[i] - m) * inv;
                    const double dxhat = gr[i] * gch;
                    gxr[i] = inv * (dxhat - inv_n * (sum_dxhat + xhat * sum_dxhat_xhat));
                }
            }
        }
        return gx;
    }

    void params(std::vector<Param*>& ps) {
        ps.push_back(&gamma);
        ps.push_back(&beta);
    }
};

// ---------------------------------------------------------------------------
// Nearest-neighbour 2x upsampling of (C,H,W).
// ---------------------------------------------------------------------------
struct Upsample2x {
    std::vector<int> in_shape;

    Tensor forward(const Tensor& x) {
        in_shape = x.shape;
        const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
        Tensor y({c, 2 * h, 2 * w});
        for (int ch = 0; ch < c; ++ch)
            for (int yy = 0; yy < 2 * h; ++yy)
                for (int xx = 0; xx < 2 * w; ++xx)
                    y.v[(static_cast<std::size_t>(ch) * 2 * h + yy) * 2 * w + xx] =
                        x.v[(static_cast<std::size_t>(ch) * h + yy / 2) * w + xx / 2];
        return y;
    }
    Tensor backward(const Tensor& gy) {
        const int c = in_shape[0], h = in_shape[1], w = in_shape[2];
        Tensor gx(in_shape);
        for (int ch = 0; ch < c; ++ch)
            for (int yy = 0; yy < 2 * h; ++yy)
                for (int xx = 0; xx < 2 * w; ++xx)
                    gx.v[(static_cast<std::size_t>(ch) * h + yy / 2) * w + xx / 2] +=
                        gy.v[(static_cast<std::size_t>(ch) * 2 * h + yy) * 2 * w + xx];
        return gx;
    }
};

// ---------------------------------------------------------------------------
// Orthonormal real FFT of a (1, N) signal to an (2, N/2+1) spectrum and
// back. Scaling is chosen so both maps are orthogonal as real matrices
// (Parseval holds exactly), which makes the backward pass the inverse map.
// ---------------------------------------------------------------------------
namespace detail {

inline void fft_complex(std::vector<double>& re, std::vector<double>& im, bool inverse) {
    const std::size_t n = re.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size not a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        double wr = std::cos(ang), wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t j = 0; j < len / 2; ++j) {
                double ur = re[i + j], ui = im[i + j];
                double vr = re[i + j + len / 2] * cr - im[i + j + len / 2] * ci;
                double vi = re[i + j + len / 2] * ci + im[i + j + len / 2] * cr;
                re[i + j] = ur + vr;
                im[i + j] = ui + vi;
                re[i + j + len / 2] = ur - vr;
                im[i + j + len / 2] = ui - vi;
                double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
    if (inverse)
        for (std::size_t i = 0; i < n; ++i) {
            re[i] /= static_cast<double>(n);
            im[i] /= static_cast<double>(n);
        }
}

}  // namespace detail

struct Rfft {
    int n = 0;  // power of two

    explicit Rfft(int len = 0) : n(len) {}

    // (1, N) -> (2, N/2+1): rows are re and im with orthonormal scaling.
    Tensor forward(const Tensor& x) const {
        if (static_cast<int>(x.numel()) != n) throw std::invalid_argument("Rfft: bad input");
        std::vector<double> re(x.v.begin(), x.v.end()), im(n, 0.0);
        detail::fft_complex(re, im, false);
        const int b = n / 2 + 1;
        Tensor y({2, b});
        double c_edge = 1.0 / std::sqrt(static_cast<double>(n));
        double c_mid = std::sqrt(2.0 / static_cast<double>(n));
        for (int k = 0; k < b; ++k) {
            double c = (k == 0 || k == n / 2) ? c_edge : c_mid;
            y.v[k] = c * re[k];
            y.v[b + k] = (k == 0 || k == n / 2) ? 0.0 : c * im[k];
        }
        return y;
    }

    // Adjoint (= inverse on the spectrum range).
    Tensor adjoint(const Tensor& gy) const {
        const int b = n / 2 + 1;
        std::vector<double> re(n, 0.0), im(n, 0.0);
        double c_edge = 1.0 / std::sqrt(static_cast<double>(n));
        double c_mid = std::sqrt(2.0 / static_cast<double>(n));
        re[0] = static_cast<double>(n) * c_edge * gy.v[0];
        re[n / 2] = static_cast<double>(n) * c_edge * gy.v[n / 2];
        for (int k = 1; k < n / 2; ++k) {
            double scale = static_cast<double>(n) * c_mid / 2.0;
            re[k] = scale * gy.v[k];
            im[k] = scale * gy.v[b + k];
            re[n - k] = re[k];
            im[n - k] = -im[k];
        }
        detail::fft_complex(re, im, true);
        Tensor gx({1, n});
        for (int i = 0; i < n; ++i) gx.v[i] = re[i];
        return gx;
    }

    Tensor backward(const Tensor& gy) const { return adjoint(gy); }
};

// Inverse spectrum-to-signal map; forward is Rfft::adjoint, backward is
// Rfft::forward.
struct Irfft {
    Rfft fft;

    explicit Irfft(int len = 0) : fft(len) {}

    Tensor forward(const Tensor& spec) const { return fft.adjoint(spec); }
    Tensor backward(const Tensor& gy) const { return fft.forward(gy); }
};

// ---------------------------------------------------------------------------
// Per-bin magnitude of an (2, B) spectrum -> (1, B).
// ---------------------------------------------------------------------------
struct Magnitude {
    Tensor x_cache;
    static constexpr double kEps = 1e-12;

    Tensor forward(const Tensor& x) {
        x_cache = x;
        const int b = x.shape[1];
        Tensor y({1, b});
        for (int i = 0; i < b; ++i)
            y.v[i] = std::sqrt(x.v[i] * x.v[i] + x.v[b + i] * x.v[b + i] + kEps);
        return y;
    }
    Tensor backward(const Tensor& gy) {
        const int b = x_cache.shape[1];
        Tensor gx = zeros_like(x_cache);
        for (int i = 0; i < b; ++i) {
            double m = std::sqrt(x_cache.v[i] * x_cache.v[i] +
                                 x_cache.v[b + i] * x_cache.v[b + i] + kEps);
            gx.v[i] = gy.v[i] * x_cache.v[i] / m;
            gx.v[b + i] = gy.v[i] * x_cache.v[b + i] / m;
        }
        return gx;
    }
};

// Sinusoidal timestep embedding (fixed, parameter free).
inline Tensor time_embedding(int t, int dim) {
    Tensor e({dim});
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        e.v[i] = std::sin(t * freq);
        e.v[half + i] = std::cos(t * freq);
    }
    return e;
}

}  // namespace stegsan::nn
