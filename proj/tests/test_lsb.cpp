#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>

#include "stegsan/audio_lsb.hpp"
#include "stegsan/lsb.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/rng.hpp"

using namespace stegsan;

namespace {

ImageTensor random_image(int c, int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    ImageTensor img = make_image(c, h, w);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

AudioClip random_clip(std::size_t n, std::uint64_t seed, int rate = 16000) {
    SeededRng rng(seed);
    std::vector<std::int16_t> s(n);
    for (auto& v : s) v = static_cast<std::int16_t>(rng.below(65536) - 32768);
    return make_clip(std::move(s), rate);
}

}  // namespace

TEST_CASE("lsb bitwise oracle: hand-computed example") {
    ImageTensor cover = make_image(1, 1, 1);
    ImageTensor secret = make_image(1, 1, 1);
    cover.data[0] = 0b10110010;
    secret.data[0] = 0b11010111;
    ImageTensor container = lsb_hide(cover, secret, 4);
    CHECK(container.data[0] == 0b10111101);  // 189
    ImageTensor revealed = lsb_reveal(container, 4);
    CHECK(revealed.data[0] == 0b11010000);  // 208
}

TEST_CASE("lsb reveal(hide) reproduces top n bits exactly, distortion bounded") {
    for (int n = 1; n <= 8; ++n) {
        ImageTensor cover = random_image(3, 16, 16, 100 + n);
        ImageTensor secret = random_image(3, 16, 16, 200 + n);
        ImageTensor container = lsb_hide(cover, secret, n);
        ImageTensor revealed = lsb_reveal(container, n);
        const unsigned top_mask = n == 8 ? 0xFFu : (0xFFu << (8 - n)) & 0xFFu;
        int max_dist = (1 << n) - 1;
        for (std::size_t i = 0; i < cover.data.size(); ++i) {
            CHECK(revealed.data[i] == (secret.data[i] & top_mask));
            CHECK(std::abs(int(container.data[i]) - int(cover.data[i])) <= max_dist);
        }
    }
}

TEST_CASE("lsb n=8 replaces the container with the secret, reveal is identity") {
    ImageTensor cover = random_image(3, 8, 8, 1);
    ImageTensor secret = random_image(3, 8, 8, 2);
    CHECK(lsb_hide(cover, secret, 8) == secret);
    CHECK(lsb_reveal(secret, 8) == secret);
}

TEST_CASE("lsb n=1 with all-zero secret clears the LSB plane") {
    ImageTensor cover = random_image(1, 8, 8, 3);
    ImageTensor secret = make_image(1, 8, 8);
    ImageTensor container = lsb_hide(cover, secret, 1);
    for (std::size_t i = 0; i < cover.data.size(); ++i)
        CHECK(container.data[i] == (cover.data[i] & 0xFE));
}

TEST_CASE("lsb validates arguments") {
    ImageTensor a = random_image(1, 8, 8, 4);
    ImageTensor b = random_image(1, 8, 9, 5);
    CHECK_THROWS(lsb_hide(a, b, 4));
    CHECK_THROWS(lsb_hide(a, a, 0));
    CHECK_THROWS(lsb_hide(a, a, 9));
    CHECK_THROWS(lsb_reveal(a, 0));
}

TEST_CASE("audio lsb: hide then reveal reproduces the text byte-exactly") {
    AudioClip clip = random_clip(4096, 10);
    TextPayload payload = TextPayload::from_text("Hello");
    AudioClip container = audio_lsb_hide(clip, payload, 1);
    RevealedPayload revealed = audio_lsb_reveal(container, 1);
    CHECK_FALSE(revealed.malformed);
    CHECK(revealed.to_text() == "Hello");
    auto framed = payload.framed_bits();
    std::vector<std::uint8_t> payload_only(framed.begin() + 32, framed.end());
    CHECK(ber(revealed.payload_bits, payload_only) == 0.0);
}

TEST_CASE("audio lsb: empty text writes only the zero header") {
    AudioClip clip = random_clip(256, 11);
    AudioClip container = audio_lsb_hide(clip, TextPayload::from_text(""), 1);
    RevealedPayload revealed = audio_lsb_reveal(container, 1);
    CHECK_FALSE(revealed.malformed);
    CHECK(revealed.header_bits == 0);
    CHECK(revealed.payload_bits.empty());
    for (std::size_t i = 32; i < clip.samples.size(); ++i)
        CHECK(container.samples[i] == clip.samples[i]);
}

TEST_CASE("audio lsb: per-sample amplitude change is bounded, exhaustive for n=1") {
    // embed both bit values into every possible 16-bit sample value
    for (int bit = 0; bit <= 1; ++bit) {
        for (int v = -32768; v <= 32767; ++v) {
            std::int16_t s = static_cast<std::int16_t>(v);
            std::uint16_t u = static_cast<std::uint16_t>(s);
            std::uint16_t embedded = static_cast<std::uint16_t>((u & ~1u) | bit);
            int delta = std::abs(static_cast<int>(static_cast<std::int16_t>(embedded)) - v);
            CHECK(delta <= 1);
        }
    }
    // bound for a full hide at each n
    for (int n = 1; n <= 4; ++n) {
        AudioClip clip = random_clip(2048, 20 + n);
        AudioClip container = audio_lsb_hide(clip, TextPayload::from_text("bounded payload"), n);
        for (std::size_t i = 0; i < clip.samples.size(); ++i)
            CHECK(std::abs(int(container.samples[i]) - int(clip.samples[i])) <= (1 << n) - 1);
    }
}

TEST_CASE("audio lsb: capacity and header handling") {
    AudioClip tiny = random_clip(40, 30);
    // 40 samples at n=1: capacity 40 bits, header alone needs 32
    CHECK_THROWS(audio_lsb_hide(tiny, TextPayload::from_text("too long"), 1));
    CHECK_THROWS(audio_lsb_reveal(random_clip(16, 31), 1));

    // a clip whose header decodes beyond capacity: malformed, bits still returned
    AudioClip noise = random_clip(512, 32);
    for (int i = 0; i < 32; ++i) {
        // force header bits to all ones = huge length
        std::uint16_t u = static_cast<std::uint16_t>(noise.samples[i]);
        noise.samples[i] = static_cast<std::int16_t>(u | 1u);
    }
    RevealedPayload r = audio_lsb_reveal(noise, 1);
    CHECK(r.malformed);
    CHECK(r.payload_bits.size() == 512 - 32);
}

TEST_CASE("audio lsb: reveal(hide) full-frame BER is zero") {
    AudioClip clip = random_clip(8192, 33);
    TextPayload payload = TextPayload::from_text("What country, friends, is this?");
    AudioClip container = audio_lsb_hide(clip, payload, 1);
    auto embedded = payload.framed_bits();
    auto extracted = audio_lsb_extract_bits(container, 1, 0, embedded.size());
    CHECK(ber(embedded, extracted) == 0.0);
}
