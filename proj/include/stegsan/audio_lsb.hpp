#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stegsan/audio.hpp"

namespace stegsan {

// Text payload framed for embedding: 32-bit big-endian payload bit count,
// then the UTF-8 bytes. Bits are always consumed most-significant first.
struct TextPayload {
    std::vector<std::uint8_t> bytes;

    std::uint32_t bit_length() const { return static_cast<std::uint32_t>(bytes.size() * 8); }

    static TextPayload from_text(const std::string& text) {
        TextPayload p;
        p.bytes.assign(text.begin(), text.end());
        return p;
    }

    // Header + payload as a flat bit sequence (values 0/1), MSB first.
    std::vector<std::uint8_t> framed_bits() const {
        std::vector<std::uint8_t> bits;
        bits.reserve(32 + bytes.size() * 8);
        std::uint32_t len = bit_length();
        for (int i = 31; i >= 0; --i) bits.push_back((len >> i) & 1u);
        for (std::uint8_t b : bytes)
            for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1u);
        return bits;
    }
};

// Extraction result. After sanitization the header is usually scrambled,
// so a truncated stream is returned with the malformed flag instead of
// failing; BER is computed on bits, not on decoded text.
struct RevealedPayload {
    std::vector<std::uint8_t> payload_bits;
    std::uint32_t header_bits = 0;
    bool malformed = false;

    std::string to_text() const {
        std::string s;
        for (std::size_t i = 0; i + 8 <= payload_bits.size(); i += 8) {
            unsigned b = 0;
            for (int j = 0; j < 8; ++j) b = (b << 1) | (payload_bits[i + j] & 1u);
            s.push_back(static_cast<char>(b));
        }
        return s;
    }
};

inline void check_audio_bits(int n_bits) {
    if (n_bits < 1 || n_bits > 4)
        throw std::invalid_argument("audio lsb: n_bits must be in [1,4]");
}

// Writes the framed bitstream into the n lowest bits of consecutive
// samples. Within a sample the bits fill positions n-1 down to 0, so the
// per-sample amplitude change is at most 2^n - 1.
inline AudioClip audio_lsb_hide(const AudioClip& clip, const TextPayload& text, int n_bits) {
    check_audio_bits(n_bits);
    std::vector<std::uint8_t> bits = text.framed_bits();
    std::size_t capacity = clip.samples.size() * static_cast<std::size_t>(n_bits);
    if (bits.size() > capacity)
        throw std::invalid_argument("audio_lsb_hide: payload of " + std::to_string(bits.size()) +
                                    " bits exceeds capacity " + std::to_string(capacity));
    AudioClip out = clip;
    std::size_t bit_idx = 0;
    for (std::size_t s = 0; s < out.samples.size() && bit_idx < bits.size(); ++s) {
        std::uint16_t v = static_cast<std::uint16_t>(out.samples[s]);
        for (int b = n_bits - 1; b >= 0 && bit_idx < bits.size(); --b, ++bit_idx) {
            v = static_cast<std::uint16_t>((v & ~(1u << b)) | (static_cast<unsigned>(bits[bit_idx]) << b));
        }
        out.samples[s] = static_cast<std::int16_t>(v);
    }
    return out;
}

// Raw bit extraction from the same positions audio_lsb_hide writes to.
inline std::vector<std::uint8_t> audio_lsb_extract_bits(const AudioClip& clip, int n_bits,
                                                        std::size_t skip_bits,
                                                        std::size_t count) {
    check_audio_bits(n_bits);
    std::vector<std::uint8_t> bits;
    bits.reserve(count);
    std::size_t capacity = clip.samples.size() * static_cast<std::size_t>(n_bits);
    std::size_t end = skip_bits + count;
    if (end > capacity) end = capacity;
    for (std::size_t idx = skip_bits; idx < end; ++idx) {
        std::size_t s = idx / n_bits;
        int b = n_bits - 1 - static_cast<int>(idx % n_bits);
        bits.push_back(static_cast<std::uint8_t>((static_cast<std::uint16_t>(clip.samples[s]) >> b) & 1u));
    }
    return bits;
}

inline RevealedPayload audio_lsb_reveal(const AudioClip& clip, int n_bits) {
    check_audio_bits(n_bits);
    std::size_t capacity = clip.samples.size() * static_cast<std::size_t>(n_bits);
    if (capacity < 32) throw std::invalid_argument("audio_lsb_reveal: clip too short for header");

    std::vector<std::uint8_t> header = audio_lsb_extract_bits(clip, n_bits, 0, 32);
    std::uint32_t len = 0;
    for (std::uint8_t b : header) len = (len << 1) | b;

    RevealedPayload out;
    out.header_bits = len;
    if (len > capacity - 32) {
        out.malformed = true;
        out.payload_bits = audio_lsb_extract_bits(clip, n_bits, 32, capacity - 32);
    } else {
        out.payload_bits = audio_lsb_extract_bits(clip, n_bits, 32, len);
    }
    return out;
}

}  // namespace stegsan
