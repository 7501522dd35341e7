#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stegsan/diffusion.hpp"
#include "stegsan/nn/adam.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"
#include "stegsan/schedule.hpp"

namespace stegsan {

// Pre-norm residual block with per-channel timestep conditioning:
// h + conv2(silu(gn2(conv1(silu(gn1(h))) + film(temb)))).
// conv2 starts at zero so the block begins as the identity.
struct ResBlock2d {
    nn::GroupNorm gn1, gn2;
    nn::Conv2d conv1, conv2;
    nn::Linear film;
    nn::SiLU act1, act2;

    ResBlock2d() = default;
    ResBlock2d(int channels, int emb_dim)
        : gn1(channels),
          gn2(channels),
          conv1(channels, channels, 3, 1, 1),
          conv2(channels, channels, 3, 1, 1),
          film(emb_dim, channels) {}

    void init(SeededRng& rng) {
        conv1.init(rng);
        conv2.init_zero();
        film.init(rng);
    }

    nn::Tensor forward(const nn::Tensor& h, const nn::Tensor& temb) {
        nn::Tensor u = conv1.forward(act1.forward(gn1.forward(h)));
        nn::Tensor fb = film.forward(temb);
        const int c = u.shape[0];
        const std::size_t hw = u.numel() / c;
        for (int ch = 0; ch < c; ++ch) {
            double b = fb.v[ch];
            double* p = u.v.data() + static_cast<std::size_t>(ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) p[i] += b;
        }
        u = conv2.forward(act2.forward(gn2.forward(u)));
        for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] += h.v[i];
        return u;
    }

    // Returns grad w.r.t. h; accumulates the timestep-embedding grad.
    nn::Tensor backward(const nn::Tensor& g, nn::Tensor& gtemb) {
        nn::Tensor gu = gn2.backward(act2.backward(conv2.backward(g)));
        const int c = gu.shape[0];
        const std::size_t hw = gu.numel() / c;
        nn::Tensor gf({c});
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            const double* p = gu.v.data() + static_cast<std::size_t>(ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) acc += p[i];
            gf.v[ch] = acc;
        }
        nn::Tensor ge = film.backward(gf);
        for (std::size_t i = 0; i < gtemb.v.size(); ++i) gtemb.v[i] += ge.v[i];
        nn::Tensor gh = gn1.backward(act1.backward(conv1.backward(gu)));
        for (std::size_t i = 0; i < gh.v.size(); ++i) gh.v[i] += g.v[i];
        return gh;
    }

    void params(std::vector<nn::Param*>& ps) {
        gn1.params(ps);
        gn2.params(ps);
        conv1.params(ps);
        conv2.params(ps);
        film.params(ps);
    }
};

// Noise-prediction network for (C,H,W) images: residual conv trunk with two
// down/up stages, additive skip connections and sinusoidal timestep
// conditioning. Output conv starts at zero so the initial prediction is 0.
struct Denoiser2d {
    int channels = 3, height = 16, width = 16;
    int base = 16, emb_in = 32, emb_dim = 48;

    nn::Linear emb_l1, emb_l2;
    nn::SiLU emb_act;
    nn::Conv2d conv_in;
    ResBlock2d rb1, rb2, rb3, rb4, rb5;
    nn::Conv2d down1, down2, upconv2, upconv1, conv_out;
    nn::Upsample2x up2, up1;

    Denoiser2d() { build(); }
    Denoiser2d(int c, int h, int w, int base_channels = 16)
        : channels(c), height(h), width(w), base(base_channels) {
        if (h % 4 != 0 || w % 4 != 0)
            throw std::invalid_argument("Denoiser2d: height/width must be divisible by 4");
        build();
    }

    void build() {
        const int f = base, f2 = 2 * base;
        emb_l1 = nn::Linear(emb_in, emb_dim);
        emb_l2 = nn::Linear(emb_dim, emb_dim);
        conv_in = nn::Conv2d(channels, f, 3, 1, 1);
        rb1 = ResBlock2d(f, emb_dim);
        down1 = nn::Conv2d(f, f2, 3, 2, 1);
        rb2 = ResBlock2d(f2, emb_dim);
        down2 = nn::Conv2d(f2, f2, 3, 2, 1);
        rb3 = ResBlock2d(f2, emb_dim);
        upconv2 = nn::Conv2d(f2, f2, 3, 1, 1);
        rb4 = ResBlock2d(f2, emb_dim);
        upconv1 = nn::Conv2d(f2, f, 3, 1, 1);
        rb5 = ResBlock2d(f, emb_dim);
        conv_out = nn::Conv2d(f, channels, 3, 1, 1);
    }

    void init(SeededRng rng) {
        emb_l1.init(rng);
        emb_l2.init(rng);
        conv_in.init(rng);
        rb1.init(rng);
        down1.init(rng);
        rb2.init(rng);
        down2.init(rng);
        rb3.init(rng);
        upconv2.init(rng);
        rb4.init(rng);
        upconv1.init(rng);
        rb5.init(rng);
        conv_out.init_zero();
    }

    std::vector<nn::Param*> params() {
        std::vector<nn::Param*> ps;
        emb_l1.params(ps);
        emb_l2.params(ps);
        conv_in.params(ps);
        rb1.params(ps);
        down1.params(ps);
        rb2.params(ps);
        down2.params(ps);
        rb3.params(ps);
        upconv2.params(ps);
        rb4.params(ps);
        upconv1.params(ps);
        rb5.params(ps);
        conv_out.params(ps);
        return ps;
    }

    nn::Tensor temb_cache;

    nn::Tensor forward(const nn::Tensor& x, int t) {
        nn::Tensor temb = emb_l2.forward(emb_act.forward(emb_l1.forward(nn::time_embedding(t, emb_in))));
        temb_cache = temb;
        nn::Tensor h0 = conv_in.forward(x);
        h1_cache = rb1.forward(h0, temb);
        nn::Tensor d1 = down1.forward(h1_cache);
        h2_cache = rb2.forward(d1, temb);
        nn::Tensor d2 = down2.forward(h2_cache);
        nn::Tensor h3 = rb3.forward(d2, temb);
        nn::Tensor u2 = upconv2.forward(up2.forward(h3));
        for (std::size_t i = 0; i < u2.v.size(); ++i) u2.v[i] += h2_cache.v[i];
        nn::Tensor h4 = rb4.forward(u2, temb);
        nn::Tensor u1 = upconv1.forward(up1.forward(h4));
        for (std::size_t i = 0; i < u1.v.size(); ++i) u1.v[i] += h1_cache.v[i];
        nn::Tensor h5 = rb5.forward(u1, temb);
        return conv_out.forward(h5);
    }

    nn::Tensor backward(const nn::Tensor& g) {
        nn::Tensor gtemb({emb_dim});
        nn::Tensor g5 = conv_out.backward(g);
        nn::Tensor gs1 = rb5.backward(g5, gtemb);
        nn::Tensor g4 = up1.backward(upconv1.backward(gs1));
        nn::Tensor gs2 = rb4.backward(g4, gtemb);
        nn::Tensor g3 = up2.backward(upconv2.backward(gs2));
        nn::Tensor gd2 = rb3.backward(g3, gtemb);
        nn::Tensor gh2 = down2.backward(gd2);
        for (std::size_t i = 0; i < gh2.v.size(); ++i) gh2.v[i] += gs2.v[i];
        nn::Tensor gd1 = rb2.backward(gh2, gtemb);
        nn::Tensor gh1 = down1.backward(gd1);
        for (std::size_t i = 0; i < gh1.v.size(); ++i) gh1.v[i] += gs1.v[i];
        nn::Tensor gh0 = rb1.backward(gh1, gtemb);
        nn::Tensor gx = conv_in.backward(gh0);
        emb_l1.backward(emb_act.backward(emb_l2.backward(gtemb)));
        return gx;
    }

private:
    nn::Tensor h1_cache, h2_cache;
};

// Noise-prediction network for (1,N) audio frames, built as a gated
// spectral shrinker. The frame is mapped to an orthonormal spectrum; the
// candidate noise estimate is the spectrum rescaled by 1/sqrt(1-ab_t)
// (exact for bins carrying no signal) and clipped; a small conv net over
// frequency predicts a per-bin gain in [0,1] that suppresses signal bins.
// eps_hat = irfft(gain * clip(spec / sqrt(1-ab_t))). Cover sinusoids sit
// on the frame's DFT grid, so signal energy is isolated in few bins and
// the gate decides keep-vs-suppress locally.
struct AudioDenoiser {
    static constexpr double kClip = 8.0;      // candidate noise estimate bound
    static constexpr double kMagClip = 16.0;  // scaled-magnitude feature bound

    int frame_len = 4096;
    int base = 12, emb_in = 32, emb_dim = 32;
    int horizon = 200;

    NoiseSchedule sched;
    nn::Rfft rfft{4096};
    nn::Irfft irfft{4096};
    nn::Magnitude mag;
    nn::Conv1d conv1, conv2, conv3;
    nn::Linear film1, film2;
    nn::SiLU act1, act2;
    nn::Sigmoid gate_act;
    nn::Linear emb_l1, emb_l2;
    nn::SiLU emb_act;

    AudioDenoiser() { build(); }
    explicit AudioDenoiser(int n, int base_channels = 12, int T = 200)
        : frame_len(n), base(base_channels), horizon(T) {
        if (n < 8 || (n & (n - 1)) != 0)
            throw std::invalid_argument("AudioDenoiser: frame length must be a power of two");
        build();
    }

    void build() {
        sched = cosine_schedule(horizon);
        rfft = nn::Rfft(frame_len);
        irfft = nn::Irfft(frame_len);
        conv1 = nn::Conv1d(4, base, 3, 1, 1);
        conv2 = nn::Conv1d(base, base, 1, 1, 0);
        conv3 = nn::Conv1d(base, 1, 1, 1, 0);
        film1 = nn::Linear(emb_dim, base);
        film2 = nn::Linear(emb_dim, base);
        emb_l1 = nn::Linear(emb_in, emb_dim);
        emb_l2 = nn::Linear(emb_dim, emb_dim);
    }

    void init(SeededRng rng) {
        conv1.init(rng);
        conv2.init(rng);
        conv3.init_zero();  // gate starts at 0.5 everywhere
        film1.init(rng);
        film2.init(rng);
        emb_l1.init(rng);
        emb_l2.init(rng);
    }

    std::vector<nn::Param*> params() {
        std::vector<nn::Param*> ps;
        conv1.params(ps);
        conv2.params(ps);
        conv3.params(ps);
        film1.params(ps);
        film2.params(ps);
        emb_l1.params(ps);
        emb_l2.params(ps);
        return ps;
    }

    nn::Tensor forward(const nn::Tensor& x, int t) {
        if (static_cast<int>(x.numel()) != frame_len)
            throw std::invalid_argument("AudioDenoiser: bad frame length");
        sched.check_t(t);
        nn::Tensor temb =
            emb_l2.forward(emb_act.forward(emb_l1.forward(nn::time_embedding(t, emb_in))));
        nn::Tensor spec = rfft.forward(x);
        const int b = spec.shape[1];
        const double s = std::max(sched.sqrt_1mab[t], 1e-8);

        // candidate noise spectrum: exact for signal-free bins
        z_cache = nn::Tensor({2, b});
        z_clip_mask.assign(2 * b, 1.0);
        for (int i = 0; i < 2 * b; ++i) {
            double z = spec.v[i] / s;
            if (z > kClip) {
                z = kClip;
                z_clip_mask[i] = 0.0;
            } else if (z < -kClip) {
                z = -kClip;
                z_clip_mask[i] = 0.0;
            }
            z_cache.v[i] = z;
        }

        nn::Tensor m = mag.forward(spec);
        nn::Tensor feats({4, b});
        mag_clip_mask.assign(b, 1.0);
        for (int i = 0; i < b; ++i) {
            feats.v[i] = z_cache.v[i];
            feats.v[b + i] = z_cache.v[b + i];
            double ms = m.v[i] / s;
            if (ms > kMagClip) {
                ms = kMagClip;
                mag_clip_mask[i] = 0.0;
            }
            feats.v[2 * b + i] = ms;
            feats.v[3 * b + i] = static_cast<double>(i) / b;
        }
        scale_cache = s;

        nn::Tensor h = conv1.forward(feats);
        add_film(h, film1.forward(temb));
        h = act1.forward(h);
        h = conv2.forward(h);
        add_film(h, film2.forward(temb));
        h = act2.forward(h);
        gain_cache = gate_act.forward(conv3.forward(h));  // (1, b) in (0,1)

        nn::Tensor eps_spec({2, b});
        for (int i = 0; i < b; ++i) {
            eps_spec.v[i] = gain_cache.v[i] * z_cache.v[i];
            eps_spec.v[b + i] = gain_cache.v[i] * z_cache.v[b + i];
        }
        return irfft.forward(eps_spec);
    }

    nn::Tensor backward(const nn::Tensor& g) {
        const int b = frame_len / 2 + 1;
        nn::Tensor gtemb({emb_dim});
        nn::Tensor geps_spec = irfft.backward(g);

        // product node: eps_spec = gain * z
        nn::Tensor ggain({1, b});
        nn::Tensor gz({2, b});
        for (int i = 0; i < b; ++i) {
            ggain.v[i] =
                geps_spec.v[i] * z_cache.v[i] + geps_spec.v[b + i] * z_cache.v[b + i];
            gz.v[i] = geps_spec.v[i] * gain_cache.v[i];
            gz.v[b + i] = geps_spec.v[b + i] * gain_cache.v[i];
        }

        nn::Tensor gh = conv3.backward(gate_act.backward(ggain));
        gh = act2.backward(gh);
        backward_film(gh, film2, gtemb);
        gh = conv2.backward(gh);
        gh = act1.backward(gh);
        backward_film(gh, film1, gtemb);
        nn::Tensor gfeats = conv1.backward(gh);

        // feature channels 0,1 are the clipped z values
        for (int i = 0; i < 2 * b; ++i) gz.v[i] += gfeats.v[i];
        nn::Tensor gspec({2, b});
        const double s = scale_cache;
        for (int i = 0; i < 2 * b; ++i) gspec.v[i] = gz.v[i] * z_clip_mask[i] / s;
        // scaled magnitude channel
        nn::Tensor gm({1, b});
        for (int i = 0; i < b; ++i) gm.v[i] = gfeats.v[2 * b + i] * mag_clip_mask[i] / s;
        nn::Tensor gspec_from_mag = mag.backward(gm);
        for (int i = 0; i < 2 * b; ++i) gspec.v[i] += gspec_from_mag.v[i];

        nn::Tensor gx = rfft.backward(gspec);
        emb_l1.backward(emb_act.backward(emb_l2.backward(gtemb)));
        return gx;
    }

private:
    nn::Tensor z_cache, gain_cache;
    std::vector<double> z_clip_mask, mag_clip_mask;
    double scale_cache = 1.0;

    static void add_film(nn::Tensor& h, const nn::Tensor& fb) {
        const int c = h.shape[0];
        const std::size_t w = h.numel() / c;
        for (int ch = 0; ch < c; ++ch) {
            double bch = fb.v[ch];
            double* p = h.v.data() + static_cast<std::size_t>(ch) * w;
            for (std::size_t i = 0; i < w; ++i) p[i] += bch;
        }
    }
    static void backward_film(const nn::Tensor& gh, nn::Linear& film, nn::Tensor& gtemb) {
        const int c = gh.shape[0];
        const std::size_t w = gh.numel() / c;
        nn::Tensor gf({c});
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            const double* p = gh.v.data() + static_cast<std::size_t>(ch) * w;
            for (std::size_t i = 0; i < w; ++i) acc += p[i];
            gf.v[ch] = acc;
        }
        nn::Tensor ge = film.backward(gf);
        for (std::size_t i = 0; i < gtemb.v.size(); ++i) gtemb.v[i] += ge.v[i];
    }
};

template <typename Model>
NoisePredictor predictor_of(Model& model) {
    return [&model](const nn::Tensor& x, int t) { return model.forward(x, t); };
}

struct DiffTrainConfig {
    int epochs = 12;
    int batch = 32;
    double lr = 1e-3;
    bool cosine_lr = true;  // decay to lr/20 across the run
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs <= 0 || batch <= 0 || lr <= 0.0)
            throw std::invalid_argument("DiffTrainConfig: values must be positive");
    }

    double lr_at(int epoch) const {
        if (!cosine_lr || epochs == 1) return lr;
        double lo = lr / 20.0;
        double c = 0.5 * (1.0 + std::cos(3.14159265358979323846 * epoch / (epochs - 1)));
        return lo + (lr - lo) * c;
    }
};

// Shared denoising objective: E ||eps - model(q_sample(x0, t, eps), t)||^2
// with t uniform in [1,T]. Single logical sequence, fully seed-determined.
template <typename Model>
std::vector<double> train_denoiser_model(Model& model, const std::vector<nn::Tensor>& data,
                                         const NoiseSchedule& sched, const DiffTrainConfig& cfg,
                                         const std::function<void(int)>& on_epoch = {}) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train_denoiser: empty dataset");
    for (const auto& d : data)
        if (!d.same_shape(data.front()))
            throw std::invalid_argument("train_denoiser: dataset shapes differ");

    SeededRng root(cfg.seed);
    model.init(root.split(1));
    auto ps = model.params();
    nn::Adam opt;
    opt.lr = cfg.lr;
    opt.attach(ps);
    SeededRng order_rng = root.split(2);
    SeededRng draw_rng = root.split(3);

    std::vector<double> history;
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    const std::size_t numel = data.front().numel();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.lr = cfg.lr_at(epoch);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[order_rng.below(i)]);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch) {
            std::size_t end = std::min(idx.size(), start + cfg.batch);
            nn::zero_grads(ps);
            double batch_loss = 0.0;
            for (std::size_t j = start; j < end; ++j) {
                const nn::Tensor& x0 = data[idx[j]];
                int t = 1 + static_cast<int>(draw_rng.below(sched.T));
                nn::Tensor eps(x0.shape);
                for (double& v : eps.v) v = draw_rng.normal();
                nn::Tensor xt(x0.shape);
                const double a = sched.sqrt_ab[t], b = sched.sqrt_1mab[t];
                for (std::size_t q = 0; q < numel; ++q) xt.v[q] = a * x0.v[q] + b * eps.v[q];
                nn::Tensor y = model.forward(xt, t);
                nn::Tensor g(y.shape);
                double loss = 0.0;
                const double inv = 1.0 / static_cast<double>(numel);
                const double gscale = 2.0 * inv / static_cast<double>(end - start);
                for (std::size_t q = 0; q < numel; ++q) {
                    double d = y.v[q] - eps.v[q];
                    loss += d * d * inv;
                    g.v[q] = gscale * d;
                }
                batch_loss += loss / static_cast<double>(end - start);
                model.backward(g);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_denoiser: loss diverged (non-finite)");
            opt.step(ps);
            epoch_loss += batch_loss;
            ++batches;
        }
        history.push_back(epoch_loss / static_cast<double>(batches));
        if (on_epoch) on_epoch(epoch);
    }
    return history;
}

struct TrainedDenoiser {
    Denoiser2d model;
    std::vector<double> epoch_loss;
};

inline TrainedDenoiser train_denoiser(const std::vector<FloatImage>& dataset,
                                      const NoiseSchedule& sched, const DiffTrainConfig& cfg,
                                      int base_channels = 16) {
    if (dataset.empty()) throw std::invalid_argument("train_denoiser: empty dataset");
    std::vector<nn::Tensor> data;
    data.reserve(dataset.size());
    for (const auto& img : dataset) data.push_back(tensor_of(img));
    TrainedDenoiser out{Denoiser2d(dataset.front().channels, dataset.front().height,
                                   dataset.front().width, base_channels),
                        {}};
    out.epoch_loss = train_denoiser_model(out.model, data, sched, cfg);
    return out;
}

struct TrainedAudioDenoiser {
    AudioDenoiser model;
    std::vector<double> epoch_loss;
};

inline TrainedAudioDenoiser train_audio_denoiser(const std::vector<std::vector<double>>& frames,
                                                 const NoiseSchedule& sched,
                                                 const DiffTrainConfig& cfg, int frame_len = 4096,
                                                 int base_channels = 12) {
    std::vector<nn::Tensor> data;
    data.reserve(frames.size());
    for (const auto& f : frames) {
        if (static_cast<int>(f.size()) != frame_len)
            throw std::invalid_argument("train_audio_denoiser: bad frame length");
        nn::Tensor t({1, frame_len});
        t.v = f;
        data.push_back(std::move(t));
    }
    TrainedAudioDenoiser out{AudioDenoiser(frame_len, base_channels, sched.T), {}};
    out.epoch_loss = train_denoiser_model(out.model, data, sched, cfg);
    return out;
}

}  // namespace stegsan
