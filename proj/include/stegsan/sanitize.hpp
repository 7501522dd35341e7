#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stegsan/audio.hpp"
#include "stegsan/dct.hpp"
#include "stegsan/diffusion.hpp"
#include "stegsan/image.hpp"
#include "stegsan/rng.hpp"
#include "stegsan/schedule.hpp"

namespace stegsan {

// Diffusion sanitization: noise the input to timestep t, predict the noise,
// invert the forward process, requantize.
inline ImageTensor dm_suds(const ImageTensor& x, int t, const NoisePredictor& model,
                           const NoiseSchedule& sched, SeededRng& rng,
                           X0Mode mode = X0Mode::exact_inversion) {
    sched.check_t(t);
    FloatImage f = to_model_range(x);
    FloatImage eps = make_float_image(f.channels, f.height, f.width);
    for (double& v : eps.data) v = rng.normal();
    FloatImage xt = q_sample(f, t, eps, sched);
    nn::Tensor eps_hat = model(tensor_of(xt), t);
    FloatImage x0_hat = predict_x0(xt, t, image_of(eps_hat), sched, mode);
    return from_model_range(x0_hat);
}

// Ablation variant: the normalized input is fed to the denoiser directly
// (no forward noising); t is still passed as conditioning.
inline ImageTensor dm_suds_direct(const ImageTensor& x, int t, const NoisePredictor& model,
                                  const NoiseSchedule& sched,
                                  X0Mode mode = X0Mode::exact_inversion) {
    sched.check_t(t);
    FloatImage xt = to_model_range(x);
    nn::Tensor eps_hat = model(tensor_of(xt), t);
    FloatImage x0_hat = predict_x0(xt, t, image_of(eps_hat), sched, mode);
    return from_model_range(x0_hat);
}

// Gaussian pixel noise on the [0,255] scale, then clamp and requantize.
inline ImageTensor gaussian_sanitize(const ImageTensor& x, double sigma, SeededRng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_sanitize: sigma must be >= 0");
    ImageTensor out = x;
    for (auto& v : out.data) {
        double p = static_cast<double>(v) + sigma * rng.normal();
        int q = round_half_away(p);
        v = static_cast<std::uint8_t>(std::clamp(q, 0, 255));
    }
    return out;
}

// Gaussian noise on every coefficient of the orthonormal per-channel DCT.
inline ImageTensor dct_noise_sanitize(const ImageTensor& x, double sigma, SeededRng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("dct_noise_sanitize: sigma must be >= 0");
    ImageTensor out = x;
    const std::size_t plane = static_cast<std::size_t>(x.height) * x.width;
    for (int c = 0; c < x.channels; ++c) {
        std::vector<double> p(plane);
        for (std::size_t i = 0; i < plane; ++i) p[i] = x.data[c * plane + i];
        std::vector<double> coeffs = dct2(p, x.height, x.width);
        for (double& v : coeffs) v += sigma * rng.normal();
        std::vector<double> back = idct2(coeffs, x.height, x.width);
        for (std::size_t i = 0; i < plane; ++i)
            out.data[c * plane + i] =
                static_cast<std::uint8_t>(std::clamp(round_half_away(back[i]), 0, 255));
    }
    return out;
}

namespace detail {

template <typename FrameFn>
AudioClip sanitize_frames(const AudioClip& clip, int frame_len, FrameFn&& process) {
    std::vector<double> x = audio_to_unit(clip);
    std::vector<double> out(x.size());
    for (std::size_t start = 0; start < x.size(); start += frame_len) {
        std::size_t len = std::min<std::size_t>(frame_len, x.size() - start);
        nn::Tensor frame({1, frame_len});  // zero padded tail
        for (std::size_t i = 0; i < len; ++i) frame.v[i] = x[start + i];
        nn::Tensor rec = process(frame);
        for (std::size_t i = 0; i < len; ++i)
            out[start + i] = std::clamp(rec.v[i], -1.0, 1.0);
    }
    return audio_from_unit(out, clip.sample_rate);
}

}  // namespace detail

// 1-D diffusion sanitization over fixed-length frames.
inline AudioClip dm_suds(const AudioClip& clip, int t, const NoisePredictor& model,
                         const NoiseSchedule& sched, SeededRng& rng, int frame_len = 4096) {
    sched.check_t(t);
    const double a = sched.sqrt_ab[t], b = sched.sqrt_1mab[t];
    return detail::sanitize_frames(clip, frame_len, [&](const nn::Tensor& frame) {
        nn::Tensor xt = frame;
        for (double& v : xt.v) v = a * v + b * rng.normal();
        nn::Tensor eps_hat = model(xt, t);
        nn::Tensor rec = xt;
        for (std::size_t i = 0; i < rec.v.size(); ++i) rec.v[i] = (xt.v[i] - b * eps_hat.v[i]) / a;
        return rec;
    });
}

inline AudioClip dm_suds_direct(const AudioClip& clip, int t, const NoisePredictor& model,
                                const NoiseSchedule& sched, int frame_len = 4096) {
    sched.check_t(t);
    const double a = sched.sqrt_ab[t], b = sched.sqrt_1mab[t];
    return detail::sanitize_frames(clip, frame_len, [&](const nn::Tensor& frame) {
        nn::Tensor eps_hat = model(frame, t);
        nn::Tensor rec = frame;
        for (std::size_t i = 0; i < rec.v.size(); ++i)
            rec.v[i] = (frame.v[i] - b * eps_hat.v[i]) / a;
        return rec;
    });
}

// Gaussian noise in 16-bit sample units.
inline AudioClip gaussian_sanitize(const AudioClip& clip, double sigma, SeededRng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_sanitize: sigma must be >= 0");
    AudioClip out = clip;
    for (auto& s : out.samples) {
        double v = static_cast<double>(s) + sigma * rng.normal();
        double q = v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5);
        s = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    }
    return out;
}

}  // namespace stegsan
