#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stegsan {

// 16-bit PCM mono clip.
struct AudioClip {
    std::vector<std::int16_t> samples;
    int sample_rate = 0;

    bool operator==(const AudioClip& o) const = default;
};

inline AudioClip make_clip(std::vector<std::int16_t> samples, int sample_rate) {
    if (samples.empty())
        throw std::invalid_argument("AudioClip: empty sample list");
    if (sample_rate <= 0)
        throw std::invalid_argument("AudioClip: sample_rate must be > 0");
    return AudioClip{std::move(samples), sample_rate};
}

// int16 -> [-1,1): x/32768.
inline std::vector<double> audio_to_unit(const AudioClip& clip) {
    std::vector<double> out(clip.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = clip.samples[i] / 32768.0;
    return out;
}

// Clamp, scale by 32768, round half away from zero, clamp to int16 range.
inline AudioClip audio_from_unit(const std::vector<double>& x, int sample_rate) {
    std::vector<std::int16_t> samples(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (!std::isfinite(v))
            throw std::domain_error("audio_from_unit: non-finite value");
        if (v < -1.0) v = -1.0;
        if (v > 1.0) v = 1.0;
        double s = v < 0.0 ? std::ceil(v * 32768.0 - 0.5) : std::floor(v * 32768.0 + 0.5);
        if (s < -32768.0) s = -32768.0;
        if (s > 32767.0) s = 32767.0;
        samples[i] = static_cast<std::int16_t>(s);
    }
    return make_clip(std::move(samples), sample_rate);
}

}  // namespace stegsan
