#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stegsan {

// Planar 8-bit image, channel-major: index (c*height + y)*width + x.
struct ImageTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(channels) * height * width;
    }
    std::uint8_t& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::uint8_t at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const ImageTensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
    bool operator==(const ImageTensor& o) const = default;
};

// Floating working representation, nominal range [-1, 1], same layout.
struct FloatImage {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(channels) * height * width;
    }
    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const FloatImage& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

inline ImageTensor make_image(int channels, int height, int width) {
    if ((channels != 1 && channels != 3) || height <= 0 || width <= 0)
        throw std::invalid_argument("make_image: bad shape");
    ImageTensor img;
    img.channels = channels;
    img.height = height;
    img.width = width;
    img.data.assign(static_cast<std::size_t>(channels) * height * width, 0);
    return img;
}

inline FloatImage make_float_image(int channels, int height, int width) {
    FloatImage img;
    img.channels = channels;
    img.height = height;
    img.width = width;
    img.data.assign(static_cast<std::size_t>(channels) * height * width, 0.0);
    return img;
}

// Fixed quantization rounding: half away from zero, same on every platform.
inline int round_half_away(double v) {
    return static_cast<int>(v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}

// [0,255] -> [-1,1]: x/127.5 - 1.
inline FloatImage to_model_range(const ImageTensor& img) {
    FloatImage out = make_float_image(img.channels, img.height, img.width);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] / 127.5 - 1.0;
    return out;
}

// Clamp to [-1,1], map to (x+1)*127.5, round half away from zero.
inline ImageTensor from_model_range(const FloatImage& f) {
    ImageTensor out = make_image(f.channels, f.height, f.width);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        double v = f.data[i];
        if (!std::isfinite(v))
            throw std::domain_error("from_model_range: non-finite value");
        if (v < -1.0) v = -1.0;
        if (v > 1.0) v = 1.0;
        int q = round_half_away((v + 1.0) * 127.5);
        if (q < 0) q = 0;
        if (q > 255) q = 255;
        out.data[i] = static_cast<std::uint8_t>(q);
    }
    return out;
}

}  // namespace stegsan
