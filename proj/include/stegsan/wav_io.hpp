#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stegsan/audio.hpp"

namespace stegsan {

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
    out.push_back((v >> 16) & 0xFF);
    out.push_back((v >> 24) & 0xFF);
}
inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
}

}  // namespace detail

// RIFF/WAVE, PCM 16-bit mono only. Compressed, float, or multichannel
// files are rejected so the bit-level contracts downstream stay exact.
inline AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_wav: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("load_wav: not a RIFF/WAVE file: " + path);

    bool have_fmt = false;
    std::uint16_t format = 0, num_channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    const unsigned char* data_ptr = nullptr;
    std::uint32_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const unsigned char* hdr = buf.data() + pos;
        std::uint32_t chunk_len = detail::read_u32le(hdr + 4);
        std::size_t body = pos + 8;
        if (body + chunk_len > buf.size())
            throw std::runtime_error("load_wav: truncated chunk in " + path);
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw std::runtime_error("load_wav: bad fmt chunk");
            format = detail::read_u16le(buf.data() + body);
            num_channels = detail::read_u16le(buf.data() + body + 2);
            sample_rate = detail::read_u32le(buf.data() + body + 4);
            bits = detail::read_u16le(buf.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_ptr = buf.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word aligned
    }

    if (!have_fmt || !data_ptr) throw std::runtime_error("load_wav: missing fmt/data chunk");
    if (format != 1)
        throw std::runtime_error("load_wav: only uncompressed PCM supported (format tag " +
                                 std::to_string(format) + ")");
    if (num_channels != 1)
        throw std::runtime_error("load_wav: only mono supported (" +
                                 std::to_string(num_channels) + " channels)");
    if (bits != 16)
        throw std::runtime_error("load_wav: only 16-bit PCM supported (" + std::to_string(bits) +
                                 " bits)");
    if (data_len < 2) throw std::runtime_error("load_wav: empty data chunk");

    std::vector<std::int16_t> samples(data_len / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::uint16_t raw = detail::read_u16le(data_ptr + 2 * i);
        samples[i] = static_cast<std::int16_t>(raw);
    }
    return make_clip(std::move(samples), static_cast<int>(sample_rate));
}

inline void save_wav(const AudioClip& clip, const std::string& path) {
    if (clip.samples.empty()) throw std::invalid_argument("save_wav: empty clip");
    if (clip.sample_rate <= 0) throw std::invalid_argument("save_wav: bad sample rate");

    std::uint32_t data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_len);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    detail::put_u32le(out, 36 + data_len);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    detail::put_u32le(out, 16);
    detail::put_u16le(out, 1);  // PCM
    detail::put_u16le(out, 1);  // mono
    detail::put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate));
    detail::put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
    detail::put_u16le(out, 2);   // block align
    detail::put_u16le(out, 16);  // bits per sample
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    detail::put_u32le(out, data_len);
    for (std::int16_t s : clip.samples)
        detail::put_u16le(out, static_cast<std::uint16_t>(s));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_wav: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("save_wav: write failed: " + path);
}

}  // namespace stegsan
