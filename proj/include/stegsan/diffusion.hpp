#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "stegsan/image.hpp"
#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"
#include "stegsan/schedule.hpp"

namespace stegsan {

// x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps
inline std::vector<double> q_sample_values(const std::vector<double>& x0, int t,
                                           const std::vector<double>& eps,
                                           const NoiseSchedule& sched) {
    sched.check_t(t);
    if (x0.size() != eps.size()) throw std::invalid_argument("q_sample: shape mismatch");
    std::vector<double> out(x0.size());
    const double a = sched.sqrt_ab[t], b = sched.sqrt_1mab[t];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
    return out;
}

inline FloatImage q_sample(const FloatImage& x0, int t, const FloatImage& eps,
                           const NoiseSchedule& sched) {
    if (!x0.same_shape(eps)) throw std::invalid_argument("q_sample: shape mismatch");
    FloatImage out = x0;
    out.data = q_sample_values(x0.data, t, eps.data, sched);
    return out;
}

struct Posterior {
    FloatImage mean;
    double variance = 0.0;
};

// q(x_{t-1} | x_t, x0): mean is a fixed combination of x0 and x_t, variance
// is ((1 - ab_{t-1}) / (1 - ab_t)) beta_t. With ab_0 = 1 the variance at
// t = 1 is exactly 0.
inline Posterior posterior(const FloatImage& x0, const FloatImage& x_t, int t,
                           const NoiseSchedule& sched) {
    sched.check_t(t);
    if (!x0.same_shape(x_t)) throw std::invalid_argument("posterior: shape mismatch");
    Posterior p;
    p.variance = sched.post_var[t];
    p.mean = x0;
    const double c0 = sched.post_coef_x0(t);
    const double ct = sched.post_coef_xt(t);
    for (std::size_t i = 0; i < p.mean.data.size(); ++i)
        p.mean.data[i] = c0 * x0.data[i] + ct * x_t.data[i];
    return p;
}

enum class X0Mode {
    exact_inversion,  // (x_t - sqrt(1-ab_t) eps) / sqrt(ab_t), the algebraic inverse
    paper_eq7,        // (x_t - beta_t/sqrt(1-ab_t) eps) / sqrt(alpha_t), literal form
};

inline std::vector<double> predict_x0_values(const std::vector<double>& x_t, int t,
                                             const std::vector<double>& eps_hat,
                                             const NoiseSchedule& sched,
                                             X0Mode mode = X0Mode::exact_inversion) {
    sched.check_t(t);
    if (x_t.size() != eps_hat.size()) throw std::invalid_argument("predict_x0: shape mismatch");
    std::vector<double> out(x_t.size());
    if (mode == X0Mode::exact_inversion) {
        const double inv = 1.0 / sched.sqrt_ab[t];
        const double b = sched.sqrt_1mab[t];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - b * eps_hat[i]) * inv;
    } else {
        const double inv = 1.0 / std::sqrt(sched.alpha[t]);
        const double b = sched.beta[t] / sched.sqrt_1mab[t];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - b * eps_hat[i]) * inv;
    }
    return out;
}

inline FloatImage predict_x0(const FloatImage& x_t, int t, const FloatImage& eps_hat,
                             const NoiseSchedule& sched, X0Mode mode = X0Mode::exact_inversion) {
    if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("predict_x0: shape mismatch");
    FloatImage out = x_t;
    out.data = predict_x0_values(x_t.data, t, eps_hat.data, sched, mode);
    return out;
}

// Noise-prediction interface shared by trained models and test stand-ins.
using NoisePredictor = std::function<nn::Tensor(const nn::Tensor&, int)>;

inline nn::Tensor tensor_of(const FloatImage& img) {
    nn::Tensor t({img.channels, img.height, img.width});
    t.v = img.data;
    return t;
}

inline FloatImage image_of(const nn::Tensor& t) {
    if (t.shape.size() != 3) throw std::invalid_argument("image_of: need (C,H,W)");
    FloatImage img = make_float_image(t.shape[0], t.shape[1], t.shape[2]);
    img.data = t.v;
    return img;
}

// Ancestral sampling: start from pure noise, at each step predict x0 by
// exact inversion and draw x_{t-1} from the posterior. Final output is
// clamped to [-1, 1].
inline std::vector<FloatImage> ancestral_sample(const NoisePredictor& model,
                                                const NoiseSchedule& sched, int n, int channels,
                                                int height, int width, SeededRng& rng) {
    std::vector<FloatImage> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        FloatImage x = make_float_image(channels, height, width);
        for (double& v : x.data) v = rng.normal();
        for (int t = sched.T; t >= 1; --t) {
            nn::Tensor eps_hat = model(tensor_of(x), t);
            FloatImage eps_img = image_of(eps_hat);
            FloatImage x0_hat = predict_x0(x, t, eps_img, sched, X0Mode::exact_inversion);
            Posterior p = posterior(x0_hat, x, t, sched);
            x = p.mean;
            if (p.variance > 0.0) {
                double sd = std::sqrt(p.variance);
                for (double& v : x.data) v += sd * rng.normal();
            }
        }
        for (double& v : x.data) v = std::min(1.0, std::max(-1.0, v));
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace stegsan
