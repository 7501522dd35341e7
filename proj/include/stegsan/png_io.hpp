#pragma once

#include <png.h>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "stegsan/image.hpp"

namespace stegsan {

namespace detail {

struct FileCloser {
    std::FILE* fp = nullptr;
    ~FileCloser() {
        if (fp) std::fclose(fp);
    }
};

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp) {
    longjmp(png_jmpbuf(png), 1);
}
inline void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace detail

// Reads an 8-bit grayscale or RGB PNG. Anything else is rejected rather
// than converted, so metric inputs are always exactly what is on disk.
inline ImageTensor load_png(const std::string& path) {
    detail::FileCloser file{std::fopen(path.c_str(), "rb")};
    if (!file.fp) throw std::runtime_error("load_png: cannot open " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw std::runtime_error("load_png: not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             detail::png_error_fn, detail::png_warn_fn);
    if (!png) throw std::runtime_error("load_png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("load_png: out of memory");
    }

    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    int channels = 0, height = 0, width = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_png: malformed PNG file: " + path);
    }

    png_init_io(png, file.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_png: unsupported bit depth " +
                                 std::to_string(bit_depth) + " (only 8-bit)");
    }
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_png: unsupported color type (only 8-bit gray or RGB)");
    }

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    channels = color_type == PNG_COLOR_TYPE_GRAY ? 1 : 3;

    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    pixels.assign(static_cast<std::size_t>(height) * width * channels, 0);
    rows.resize(height);
    for (int y = 0; y < height; ++y)
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    // interleaved rows -> planar channels
    ImageTensor img = make_image(channels, height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(c, y, x) = pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    return img;
}

inline void save_png(const ImageTensor& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("save_png: only 1- or 3-channel images");
    if (img.data.size() != img.pixel_count())
        throw std::invalid_argument("save_png: data size does not match shape");

    detail::FileCloser file{std::fopen(path.c_str(), "wb")};
    if (!file.fp) throw std::runtime_error("save_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              detail::png_error_fn, detail::png_warn_fn);
    if (!png) throw std::runtime_error("save_png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("save_png: out of memory");
    }

    std::vector<unsigned char> pixels(img.pixel_count());
    std::vector<png_bytep> rows(img.height);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("save_png: write failed: " + path);
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                pixels[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c] =
                    img.at(c, y, x);
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * img.width * img.channels;
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace stegsan
