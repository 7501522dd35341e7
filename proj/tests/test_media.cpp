#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <png.h>

#include "stegsan/audio.hpp"
#include "stegsan/image.hpp"
#include "stegsan/png_io.hpp"
#include "stegsan/rng.hpp"
#include "stegsan/wav_io.hpp"

using namespace stegsan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path p = fs::temp_directory_path() / "stegsan_media_test";
    fs::create_directories(p);
    return p;
}

ImageTensor random_image(int c, int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    ImageTensor img = make_image(c, h, w);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

}  // namespace

TEST_CASE("to_model_range maps range endpoints and midpoint") {
    ImageTensor img = make_image(1, 1, 3);
    img.data = {0, 255, 128};
    FloatImage f = to_model_range(img);
    CHECK(f.data[0] == -1.0);
    CHECK(f.data[1] == 1.0);
    CHECK(f.data[2] == Catch::Approx(128.0 / 127.5 - 1.0).epsilon(1e-12));
}

TEST_CASE("from_model_range clamps, rounds half away from zero, rejects non-finite") {
    FloatImage f = make_float_image(1, 1, 3);
    f.data = {-1.0, 2.5, -3.0};
    ImageTensor img = from_model_range(f);
    CHECK(img.data[0] == 0);
    CHECK(img.data[1] == 255);
    CHECK(img.data[2] == 0);

    // documented rounding rule: halfway cases go away from zero
    CHECK(round_half_away(0.5) == 1);
    CHECK(round_half_away(-0.5) == -1);
    CHECK(round_half_away(1.5) == 2);
    CHECK(round_half_away(-2.5) == -3);
    CHECK(round_half_away(2.4) == 2);

    FloatImage bad = make_float_image(1, 1, 1);
    bad.data = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(from_model_range(bad), std::domain_error);
    bad.data = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(from_model_range(bad), std::domain_error);
}

TEST_CASE("model range round-trip is the identity for every 8-bit value") {
    ImageTensor img = make_image(1, 16, 16);
    for (int i = 0; i < 256; ++i) img.data[i] = static_cast<std::uint8_t>(i);
    ImageTensor back = from_model_range(to_model_range(img));
    CHECK(back == img);
}

TEST_CASE("SeededRng: identical seeds give identical streams, splits differ") {
    SeededRng a(1234), b(1234), c(1235);
    for (int i = 0; i < 64; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    SeededRng a2(1234), b2(1234);
    for (int i = 0; i < 64; ++i) {
        CHECK(a2.normal() == b2.normal());
        CHECK(a2.uniform() == b2.uniform());
    }
    bool any_diff = false;
    SeededRng a3(1234);
    for (int i = 0; i < 8; ++i) any_diff |= (a3.next_u64() != c.next_u64());
    CHECK(any_diff);

    SeededRng s1 = SeededRng(99).split(1);
    SeededRng s2 = SeededRng(99).split(2);
    SeededRng s1b = SeededRng(99).split(1);
    CHECK(s1.next_u64() == s1b.next_u64());
    CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("PNG round-trip is bit exact for RGB and grayscale") {
    auto dir = temp_dir();
    ImageTensor rgb = random_image(3, 16, 16, 7);
    ImageTensor gray = random_image(1, 9, 13, 8);

    save_png(rgb, (dir / "rgb.png").string());
    save_png(gray, (dir / "gray.png").string());
    CHECK(load_png((dir / "rgb.png").string()) == rgb);
    CHECK(load_png((dir / "gray.png").string()) == gray);
}

TEST_CASE("PNG 1x1 RGB degenerate size round-trips") {
    auto dir = temp_dir();
    ImageTensor one = make_image(3, 1, 1);
    one.data = {12, 200, 33};
    save_png(one, (dir / "one.png").string());
    CHECK(load_png((dir / "one.png").string()) == one);
}

TEST_CASE("PNG rejects 16-bit input with an unsupported-bit-depth error") {
    auto dir = temp_dir();
    auto path = (dir / "deep.png").string();
    // write a 2x2 16-bit grayscale PNG with libpng directly
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, 2, 2, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    unsigned char row[4] = {0x01, 0x02, 0x03, 0x04};
    for (int y = 0; y < 2; ++y) png_write_row(png, row);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);

    CHECK_THROWS_WITH(load_png(path), Catch::Matchers::ContainsSubstring("bit depth"));
}

TEST_CASE("PNG rejects malformed files") {
    auto dir = temp_dir();
    auto path = (dir / "junk.png").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a png";
    }
    CHECK_THROWS(load_png(path));

    // valid signature but truncated body
    ImageTensor rgb = random_image(3, 8, 8, 9);
    auto good = (dir / "good.png").string();
    save_png(rgb, good);
    std::ifstream in(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto trunc = (dir / "trunc.png").string();
    std::ofstream out(trunc, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS(load_png(trunc));
}

TEST_CASE("WAV round-trip is bit exact") {
    auto dir = temp_dir();
    SeededRng rng(11);
    std::vector<std::int16_t> samples(2048);
    for (auto& s : samples) s = static_cast<std::int16_t>(rng.below(65536) - 32768);
    AudioClip clip = make_clip(samples, 16000);
    save_wav(clip, (dir / "a.wav").string());
    CHECK(load_wav((dir / "a.wav").string()) == clip);
}

TEST_CASE("WAV loader rejects stereo, float and empty files") {
    auto dir = temp_dir();

    auto write_wav = [&](const std::string& name, std::uint16_t format, std::uint16_t channels,
                         std::uint16_t bits, std::uint32_t data_len) {
        std::vector<unsigned char> out;
        auto u32 = [&](std::uint32_t v) {
            out.push_back(v & 0xFF);
            out.push_back((v >> 8) & 0xFF);
            out.push_back((v >> 16) & 0xFF);
            out.push_back((v >> 24) & 0xFF);
        };
        auto u16 = [&](std::uint16_t v) {
            out.push_back(v & 0xFF);
            out.push_back((v >> 8) & 0xFF);
        };
        out.insert(out.end(), {'R', 'I', 'F', 'F'});
        u32(36 + data_len);
        out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
        u32(16);
        u16(format);
        u16(channels);
        u32(8000);
        u32(8000u * channels * bits / 8);
        u16(static_cast<std::uint16_t>(channels * bits / 8));
        u16(bits);
        out.insert(out.end(), {'d', 'a', 't', 'a'});
        u32(data_len);
        for (std::uint32_t i = 0; i < data_len; ++i) out.push_back(0);
        std::ofstream f(dir / name, std::ios::binary);
        f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
        return (dir / name).string();
    };

    CHECK_THROWS_WITH(load_wav(write_wav("stereo.wav", 1, 2, 16, 8)),
                      Catch::Matchers::ContainsSubstring("mono"));
    CHECK_THROWS_WITH(load_wav(write_wav("float.wav", 3, 1, 32, 8)),
                      Catch::Matchers::ContainsSubstring("PCM"));
    CHECK_THROWS(load_wav(write_wav("empty.wav", 1, 1, 16, 0)));
    CHECK_THROWS(make_clip({}, 8000));
    CHECK_THROWS(make_clip({1, 2, 3}, 0));
}
