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

// Small convolutional VAE trained on cover images only (blind baseline).
// Sanitization is decode(encode-mean(x)): anything off the learned cover
// manifold, including embedded secrets, is not reproduced.
struct VaeModel {
    int channels = 3, height = 16, width = 16;
    int base = 16, latent = 64;

    nn::Conv2d enc1, enc2;
    nn::SiLU ea1, ea2;
    nn::Linear lin_mu, lin_lv;
    nn::Linear dec_lin;
    nn::SiLU da0, da1, da2;
    nn::Upsample2x up1, up2;
    nn::Conv2d dec1, dec2, dec_out;

    VaeModel() { build(); }
    VaeModel(int c, int h, int w, int latent_dim = 64, int base_channels = 16)
        : channels(c), height(h), width(w), base(base_channels), latent(latent_dim) {
        if (h % 4 != 0 || w % 4 != 0)
            throw std::invalid_argument("VaeModel: height/width must be divisible by 4");
        build();
    }

    int flat_dim() const { return 2 * base * (height / 4) * (width / 4); }

    void build() {
        enc1 = nn::Conv2d(channels, base, 3, 2, 1);
        enc2 = nn::Conv2d(base, 2 * base, 3, 2, 1);
        lin_mu = nn::Linear(flat_dim(), latent);
        lin_lv = nn::Linear(flat_dim(), latent);
        dec_lin = nn::Linear(latent, flat_dim());
        dec1 = nn::Conv2d(2 * base, base, 3, 1, 1);
        dec2 = nn::Conv2d(base, base, 3, 1, 1);
        dec_out = nn::Conv2d(base, channels, 3, 1, 1);
    }

    void init(SeededRng rng) {
        enc1.init(rng);
        enc2.init(rng);
        lin_mu.init(rng, 0.1);
        lin_lv.init(rng, 0.1);
        dec_lin.init(rng);
        dec1.init(rng);
        dec2.init(rng);
        dec_out.init(rng, 0.1);
    }

    std::vector<nn::Param*> params() {
        std::vector<nn::Param*> ps;
        enc1.params(ps);
        enc2.params(ps);
        lin_mu.params(ps);
        lin_lv.params(ps);
        dec_lin.params(ps);
        dec1.params(ps);
        dec2.params(ps);
        dec_out.params(ps);
        return ps;
    }

    struct Latent {
        nn::Tensor mu;
        nn::Tensor logvar;
    };

    Latent encode(const nn::Tensor& x) {
        nn::Tensor h = ea1.forward(enc1.forward(x));
        h = ea2.forward(enc2.forward(h));
        nn::Tensor flat({flat_dim()});
        flat.v = h.v;
        enc_shape_ = h.shape;
        return Latent{lin_mu.forward(flat), lin_lv.forward(flat)};
    }

    nn::Tensor decode(const nn::Tensor& z) {
        nn::Tensor h = da0.forward(dec_lin.forward(z));
        nn::Tensor grid({2 * base, height / 4, width / 4});
        grid.v = h.v;
        grid = da1.forward(dec1.forward(up1.forward(grid)));
        grid = da2.forward(dec2.forward(up2.forward(grid)));
        return dec_out.forward(grid);
    }

    // Gradient of decode; returns grad w.r.t. z.
    nn::Tensor decode_backward(const nn::Tensor& gy) {
        nn::Tensor g = dec_out.backward(gy);
        g = up2.backward(dec2.backward(da2.backward(g)));
        g = up1.backward(dec1.backward(da1.backward(g)));
        nn::Tensor flat({flat_dim()});
        flat.v = g.v;
        return dec_lin.backward(da0.backward(flat));
    }

    // Gradient of encode; takes grads w.r.t. mu and logvar.
    nn::Tensor encode_backward(const nn::Tensor& gmu, const nn::Tensor& glv) {
        nn::Tensor gflat = lin_mu.backward(gmu);
        nn::Tensor gflat2 = lin_lv.backward(glv);
        for (std::size_t i = 0; i < gflat.v.size(); ++i) gflat.v[i] += gflat2.v[i];
        nn::Tensor g(enc_shape_);
        g.v = gflat.v;
        g = enc1.backward(ea1.backward(enc2.backward(ea2.backward(g))));
        return g;
    }

private:
    std::vector<int> enc_shape_;
};

struct VaeTrainConfig {
    int epochs = 20;
    int batch = 32;
    double lr = 1e-3;
    double beta = 1.0;  // plain ELBO
    int latent = 64;
    bool cosine_lr = true;
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs <= 0 || batch <= 0 || lr <= 0.0 || beta < 0.0 || latent <= 0)
            throw std::invalid_argument("VaeTrainConfig: bad values");
    }

    double lr_at(int epoch) const {
        if (!cosine_lr || epochs == 1) return lr;
        double lo = lr / 20.0;
        double c = 0.5 * (1.0 + std::cos(3.14159265358979323846 * epoch / (epochs - 1)));
        return lo + (lr - lo) * c;
    }
};

struct TrainedVae {
    VaeModel model;
    std::vector<double> epoch_loss;  // per-element ELBO
};

inline TrainedVae train_vae(const std::vector<FloatImage>& dataset, const VaeTrainConfig& cfg,
                            const std::function<void(int)>& on_epoch = {}) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("train_vae: empty dataset");
    const auto& first = dataset.front();
    TrainedVae out{VaeModel(first.channels, first.height, first.width, cfg.latent), {}};
    VaeModel& m = out.model;

    SeededRng root(cfg.seed);
    m.init(root.split(1));
    auto ps = m.params();
    nn::Adam opt;
    opt.lr = cfg.lr;
    opt.attach(ps);
    SeededRng order_rng = root.split(2);
    SeededRng noise_rng = root.split(3);

    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const std::size_t numel = first.data.size();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.lr = cfg.lr_at(epoch);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[order_rng.below(i)]);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch) {
            std::size_t end = std::min(idx.size(), start + cfg.batch);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            nn::zero_grads(ps);
            double batch_loss = 0.0;
            for (std::size_t j = start; j < end; ++j) {
                nn::Tensor x({first.channels, first.height, first.width});
                x.v = dataset[idx[j]].data;
                auto lat = m.encode(x);
                nn::Tensor z({m.latent}), eta({m.latent});
                for (int q = 0; q < m.latent; ++q) {
                    eta.v[q] = noise_rng.normal();
                    z.v[q] = lat.mu.v[q] + std::exp(0.5 * lat.logvar.v[q]) * eta.v[q];
                }
                nn::Tensor xhat = m.decode(z);

                double recon = 0.0, kl = 0.0;
                nn::Tensor gxhat(xhat.shape);
                for (std::size_t q = 0; q < numel; ++q) {
                    double d = xhat.v[q] - x.v[q];
                    recon += 0.5 * d * d;
                    gxhat.v[q] = d * inv_b;
                }
                nn::Tensor gmu({m.latent}), glv({m.latent});
                nn::Tensor gz = m.decode_backward(gxhat);
                for (int q = 0; q < m.latent; ++q) {
                    double mu = lat.mu.v[q], lv = lat.logvar.v[q];
                    kl += -0.5 * (1.0 + lv - mu * mu - std::exp(lv));
                    gmu.v[q] = gz.v[q] + cfg.beta * mu * inv_b;
                    glv.v[q] = gz.v[q] * eta.v[q] * 0.5 * std::exp(0.5 * lv) +
                               cfg.beta * 0.5 * (std::exp(lv) - 1.0) * inv_b;
                }
                m.encode_backward(gmu, glv);
                batch_loss += (recon + cfg.beta * kl) * inv_b / static_cast<double>(numel);
            }
            if (!std::isfinite(batch_loss)) throw std::runtime_error("train_vae: loss diverged");
            opt.step(ps);
            epoch_loss += batch_loss;
            ++batches;
        }
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
        if (on_epoch) on_epoch(epoch);
    }
    return out;
}

// Deterministic sanitization through the mean latent.
inline ImageTensor vae_sanitize(const ImageTensor& x, VaeModel& model) {
    if (x.channels != model.channels || x.height != model.height || x.width != model.width)
        throw std::invalid_argument("vae_sanitize: shape does not match the trained model");
    FloatImage f = to_model_range(x);
    nn::Tensor xin({f.channels, f.height, f.width});
    xin.v = f.data;
    auto lat = model.encode(xin);
    nn::Tensor xhat = model.decode(lat.mu);
    FloatImage out = make_float_image(f.channels, f.height, f.width);
    out.data = xhat.v;
    return from_model_range(out);
}

}  // namespace stegsan
