#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stegsan/image.hpp"
#include "stegsan/nn/adam.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"

namespace stegsan {

// Dependent deep hiding at desk scale: the hide net maps (cover, secret) to
// a bounded residual added to the cover, so containers start near covers
// and stay cover conditioned; the reveal net decodes the secret back out.
struct HidePair {
    int channels = 3, height = 16, width = 16;
    int base = 24;

    // hide: concat(cover, secret) -> residual
    nn::Conv2d h1, h2, h3;
    nn::SiLU ha1, ha2;
    nn::Tanh hout;
    // reveal: container -> secret estimate
    nn::Conv2d r1, r2, r3;
    nn::SiLU ra1, ra2;

    // training metadata
    int trained_epochs = 0;
    double final_cover_mse = 0.0;
    double final_secret_mse = 0.0;

    HidePair() { build(); }
    HidePair(int c, int h, int w, int base_channels = 24)
        : channels(c), height(h), width(w), base(base_channels) {
        build();
    }

    void build() {
        h1 = nn::Conv2d(2 * channels, base, 3, 1, 1);
        h2 = nn::Conv2d(base, base, 3, 1, 1);
        h3 = nn::Conv2d(base, channels, 3, 1, 1);
        r1 = nn::Conv2d(channels, base, 3, 1, 1);
        r2 = nn::Conv2d(base, base, 3, 1, 1);
        r3 = nn::Conv2d(base, channels, 3, 1, 1);
    }

    void init(SeededRng rng) {
        h1.init(rng);
        h2.init(rng);
        h3.init(rng, 0.2);  // start with a small residual
        r1.init(rng);
        r2.init(rng);
        r3.init(rng);
    }

    std::vector<nn::Param*> params() {
        std::vector<nn::Param*> ps;
        h1.params(ps);
        h2.params(ps);
        h3.params(ps);
        r1.params(ps);
        r2.params(ps);
        r3.params(ps);
        return ps;
    }

    // container = cover + tanh(convs(concat(cover, secret)))
    nn::Tensor hide_forward(const nn::Tensor& cover, const nn::Tensor& secret) {
        if (!cover.same_shape(secret)) throw std::invalid_argument("hide: shape mismatch");
        nn::Tensor cat({2 * channels, height, width});
        std::copy(cover.v.begin(), cover.v.end(), cat.v.begin());
        std::copy(secret.v.begin(), secret.v.end(), cat.v.begin() + cover.v.size());
        nn::Tensor r = hout.forward(h3.forward(ha2.forward(h2.forward(ha1.forward(h1.forward(cat))))));
        residual_cache = r;
        nn::Tensor container = cover;
        for (std::size_t i = 0; i < container.v.size(); ++i) container.v[i] += r.v[i];
        return container;
    }

    // Backpropagates a gradient arriving at the residual.
    void hide_backward(const nn::Tensor& g_residual) {
        h1.backward(ha1.backward(h2.backward(ha2.backward(h3.backward(hout.backward(g_residual))))));
    }

    nn::Tensor reveal_forward(const nn::Tensor& container) {
        return r3.forward(ra2.forward(r2.forward(ra1.forward(r1.forward(container)))));
    }

    nn::Tensor reveal_backward(const nn::Tensor& g) {
        return r1.backward(ra1.backward(r2.backward(ra2.backward(r3.backward(g)))));
    }

    const nn::Tensor& last_residual() const { return residual_cache; }

private:
    nn::Tensor residual_cache;
};

struct HideTrainConfig {
    double lambda_cover = 1.0;
    double lambda_secret = 0.75;
    int epochs = 30;
    int batch = 32;
    double lr = 1e-3;
    bool cosine_lr = true;
    std::uint64_t seed = 1;

    void validate() const {
        // lambda_secret = 0 is the documented degenerate cover-only objective
        if (lambda_cover <= 0.0 || lambda_secret < 0.0)
            throw std::invalid_argument("HideTrainConfig: bad loss weights");
        if (epochs <= 0 || batch <= 0 || lr <= 0.0)
            throw std::invalid_argument("HideTrainConfig: bad values");
    }

    double lr_at(int epoch) const {
        if (!cosine_lr || epochs == 1) return lr;
        double lo = lr / 20.0;
        double c = 0.5 * (1.0 + std::cos(3.14159265358979323846 * epoch / (epochs - 1)));
        return lo + (lr - lo) * c;
    }
};

struct TrainedHidePair {
    HidePair pair;
    std::vector<double> epoch_loss;
};

// Joint objective: lambda_cover * MSE(cover, container)
//                + lambda_secret * MSE(secret, revealed).
// Cover/secret pairs are drawn as a fresh derangement-style permutation each
// epoch so no image is its own secret.
inline TrainedHidePair train_hide_pair(const std::vector<FloatImage>& dataset,
                                       const HideTrainConfig& cfg, int base_channels = 24,
                                       const std::function<void(int)>& on_epoch = {}) {
    cfg.validate();
    if (dataset.size() < 2) throw std::invalid_argument("train_hide_pair: need >= 2 images");
    const auto& first = dataset.front();
    for (const auto& d : dataset)
        if (d.channels != first.channels || d.height != first.height || d.width != first.width)
            throw std::invalid_argument("train_hide_pair: dataset shapes differ");

    TrainedHidePair out{HidePair(first.channels, first.height, first.width, base_channels), {}};
    HidePair& pair = out.pair;

    SeededRng root(cfg.seed);
    pair.init(root.split(1));
    auto ps = pair.params();
    nn::Adam opt;
    opt.lr = cfg.lr;
    opt.attach(ps);
    SeededRng order_rng = root.split(2);

    const std::size_t n = dataset.size();
    const std::size_t numel = first.data.size();
    std::vector<std::size_t> covers(n), secrets(n);
    for (std::size_t i = 0; i < n; ++i) covers[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.lr = cfg.lr_at(epoch);
        for (std::size_t i = n; i > 1; --i)
            std::swap(covers[i - 1], covers[order_rng.below(i)]);
        // secret for cover k is the next shuffled image: never itself
        for (std::size_t i = 0; i < n; ++i) secrets[i] = covers[(i + 1) % n];

        double epoch_loss = 0.0, cover_mse = 0.0, secret_mse = 0.0;
        std::size_t batches = 0, seen = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch) {
            std::size_t end = std::min(n, start + cfg.batch);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            nn::zero_grads(ps);
            double batch_loss = 0.0;
            for (std::size_t j = start; j < end; ++j) {
                nn::Tensor cover({first.channels, first.height, first.width});
                cover.v = dataset[covers[j]].data;
                nn::Tensor secret = cover;
                secret.v = dataset[secrets[j]].data;

                nn::Tensor container = pair.hide_forward(cover, secret);
                nn::Tensor revealed = pair.reveal_forward(container);

                double lc = 0.0, ls = 0.0;
                nn::Tensor g_rev(revealed.shape);
                const double inv_n = 1.0 / static_cast<double>(numel);
                for (std::size_t q = 0; q < numel; ++q) {
                    double dr = revealed.v[q] - secret.v[q];
                    ls += dr * dr * inv_n;
                    g_rev.v[q] = cfg.lambda_secret * 2.0 * dr * inv_n * inv_b;
                }
                nn::Tensor g_container = pair.reveal_backward(g_rev);
                const nn::Tensor& r = pair.last_residual();
                nn::Tensor g_res(g_container.shape);
                for (std::size_t q = 0; q < numel; ++q) {
                    lc += r.v[q] * r.v[q] * inv_n;
                    g_res.v[q] = g_container.v[q] + cfg.lambda_cover * 2.0 * r.v[q] * inv_n * inv_b;
                }
                pair.hide_backward(g_res);

                batch_loss += (cfg.lambda_cover * lc + cfg.lambda_secret * ls) * inv_b;
                cover_mse += lc;
                secret_mse += ls;
                ++seen;
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_hide_pair: loss diverged");
            opt.step(ps);
            epoch_loss += batch_loss;
            ++batches;
        }
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
        pair.trained_epochs = epoch + 1;
        pair.final_cover_mse = cover_mse / static_cast<double>(seen);
        pair.final_secret_mse = secret_mse / static_cast<double>(seen);
        if (on_epoch) on_epoch(epoch);
    }
    return out;
}

inline ImageTensor ddh_hide(HidePair& pair, const ImageTensor& cover, const ImageTensor& secret) {
    if (cover.channels != pair.channels || cover.height != pair.height ||
        cover.width != pair.width || !cover.same_shape(secret))
        throw std::invalid_argument("ddh_hide: shape does not match the trained pair");
    FloatImage fc = to_model_range(cover), fs = to_model_range(secret);
    nn::Tensor c({fc.channels, fc.height, fc.width}), s = c;
    c.v = fc.data;
    s.v = fs.data;
    nn::Tensor container = pair.hide_forward(c, s);
    FloatImage out = make_float_image(fc.channels, fc.height, fc.width);
    out.data = container.v;
    return from_model_range(out);
}

inline ImageTensor ddh_reveal(HidePair& pair, const ImageTensor& container) {
    if (container.channels != pair.channels || container.height != pair.height ||
        container.width != pair.width)
        throw std::invalid_argument("ddh_reveal: shape does not match the trained pair");
    FloatImage f = to_model_range(container);
    nn::Tensor c({f.channels, f.height, f.width});
    c.v = f.data;
    nn::Tensor revealed = pair.reveal_forward(c);
    FloatImage out = make_float_image(f.channels, f.height, f.width);
    out.data = revealed.v;
    return from_model_range(out);
}

}  // namespace stegsan
