#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stegsan/audio.hpp"
#include "stegsan/image.hpp"
#include "stegsan/rng.hpp"

namespace stegsan {

// Procedural stand-in for a natural-image corpus: gradient background plus
// a few filled rectangles, circles and bars. Piecewise smooth with sharp
// edges and a saturated palette, enough structure and pixel variance for
// denoisers and hiders to learn from. Image i depends only on (seed, i).
inline ImageTensor gen_synthetic_image(int channels, int height, int width, std::uint64_t seed,
                                       std::uint64_t index) {
    SeededRng rng = SeededRng(seed).split(0x1000 + index);
    std::vector<double> px(static_cast<std::size_t>(channels) * height * width);

    // saturated palette: each channel sits near one of the two extremes
    auto pick_color = [&rng](std::vector<double>& col) {
        for (double& v : col)
            v = rng.below(2) ? rng.uniform(0.0, 60.0) : rng.uniform(195.0, 255.0);
    };

    // gradient background between two random colors along a random direction
    double angle = rng.uniform(0.0, 6.283185307179586);
    double dx = std::cos(angle), dy = std::sin(angle);
    std::vector<double> c0(channels), c1(channels);
    pick_color(c0);
    pick_color(c1);
    double span = std::fabs(dx) * width + std::fabs(dy) * height + 1e-9;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double s = (dx * x + dy * y) / span;
            s = s - std::floor(s);
            for (int c = 0; c < channels; ++c)
                px[(static_cast<std::size_t>(c) * height + y) * width + x] =
                    c0[c] + (c1[c] - c0[c]) * s;
        }

    int shapes = 2 + static_cast<int>(rng.below(3));
    for (int k = 0; k < shapes; ++k) {
        int kind = static_cast<int>(rng.below(3));
        std::vector<double> col(channels);
        pick_color(col);
        double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
        double rx = rng.uniform(width * 0.15, width * 0.5);
        double ry = rng.uniform(height * 0.15, height * 0.5);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                bool inside = false;
                if (kind == 0) {  // rectangle
                    inside = std::fabs(x - cx) <= rx && std::fabs(y - cy) <= ry;
                } else if (kind == 1) {  // ellipse
                    double ux = (x - cx) / rx, uy = (y - cy) / ry;
                    inside = ux * ux + uy * uy <= 1.0;
                } else {  // bar along the gradient direction
                    double proj = (x - cx) * dx + (y - cy) * dy;
                    inside = std::fabs(proj) <= rx * 0.4;
                }
                if (inside)
                    for (int c = 0; c < channels; ++c)
                        px[(static_cast<std::size_t>(c) * height + y) * width + x] = col[c];
            }
    }

    ImageTensor img = make_image(channels, height, width);
    for (std::size_t i = 0; i < px.size(); ++i) {
        int q = round_half_away(px[i]);
        img.data[i] = static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
    }
    return img;
}

inline std::vector<ImageTensor> gen_synthetic_images(int n, int channels, int height, int width,
                                                     std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("gen_synthetic_images: n must be > 0");
    std::vector<ImageTensor> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(gen_synthetic_image(channels, height, width, seed, i));
    return out;
}

// Cover audio: a few sinusoids whose frequencies sit exactly on the DFT grid
// of one frame, so every frame of the clip has the same sparse spectrum.
inline AudioClip gen_synthetic_clip(int frames, int frame_len, int sample_rate,
                                    std::uint64_t seed, std::uint64_t index) {
    SeededRng rng = SeededRng(seed).split(0x2000 + index);
    int n_sin = 2 + static_cast<int>(rng.below(2));
    std::vector<double> amp(n_sin), phase(n_sin);
    std::vector<int> bin(n_sin);
    for (int k = 0; k < n_sin; ++k) {
        bin[k] = 8 + static_cast<int>(rng.below(313));
        amp[k] = rng.uniform(0.08, 0.22);
        phase[k] = rng.uniform(0.0, 6.283185307179586);
    }
    std::size_t total = static_cast<std::size_t>(frames) * frame_len;
    std::vector<double> x(total, 0.0);
    const double two_pi = 6.283185307179586;
    for (int k = 0; k < n_sin; ++k)
        for (std::size_t i = 0; i < total; ++i)
            x[i] += amp[k] * std::sin(two_pi * bin[k] * static_cast<double>(i) / frame_len +
                                      phase[k]);
    return audio_from_unit(x, sample_rate);
}

inline std::vector<AudioClip> gen_synthetic_clips(int n, int frames, int frame_len,
                                                  int sample_rate, std::uint64_t seed) {
    std::vector<AudioClip> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(gen_synthetic_clip(frames, frame_len, sample_rate, seed, i));
    return out;
}

// Deterministic text secrets of assorted lengths for the audio experiments.
inline std::string synthetic_sentence(std::size_t index) {
    static const char* kSentences[] = {
        "The quick brown fox jumps over the lazy dog.",
        "Meet me at the harbor when the bells ring twice.",
        "Seventeen crates arrive on the morning tide.",
        "Keep this between us until the season turns.",
        "A short note.",
        "The password rotates on the first day of every month, so check the ledger "
        "before sending anything across the channel.",
        "North gate, third lamp, under the loose stone.",
        "All clear.",
        "Bring the maps and the spare key to the old mill after dark, and tell "
        "nobody which road you took.",
        "Rain expected by nightfall.",
    };
    return kSentences[index % (sizeof(kSentences) / sizeof(kSentences[0]))];
}

}  // namespace stegsan
