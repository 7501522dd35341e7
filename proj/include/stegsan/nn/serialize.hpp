#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stegsan/nn/layers.hpp"

namespace stegsan::nn {

// Versioned binary weight file. Little-endian, fixed header with enough
// metadata (shape, horizon, schedule kind, seed) to refuse mismatched
// models at load time. Parameters are stored in the model's declared order.
struct ModelMeta {
    std::uint32_t kind = 0;  // 1 image denoiser, 2 audio denoiser, 3 vae, 4 hide pair
    std::uint64_t seed = 0;
    std::uint32_t horizon = 0;        // diffusion T, 0 if not applicable
    std::uint32_t schedule_kind = 0;  // 0 none, 1 cosine
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;   // frame length for 1-D models
    std::uint32_t hyper1 = 0;  // base channels (denoisers, hider) or latent dim (vae)
    std::uint32_t hyper2 = 0;  // base channels (vae)

    bool operator==(const ModelMeta&) const = default;
};

namespace detail {

constexpr char kMagic[4] = {'S', 'T', 'G', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("model file: truncated");
}

}  // namespace detail

inline void save_model(const std::string& path, const ModelMeta& meta,
                       const std::vector<Param*>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out.write(detail::kMagic, 4);
    detail::write_pod(out, detail::kVersion);
    detail::write_pod(out, meta.kind);
    detail::write_pod(out, meta.seed);
    detail::write_pod(out, meta.horizon);
    detail::write_pod(out, meta.schedule_kind);
    detail::write_pod(out, meta.channels);
    detail::write_pod(out, meta.height);
    detail::write_pod(out, meta.width);
    detail::write_pod(out, meta.hyper1);
    detail::write_pod(out, meta.hyper2);
    detail::write_pod(out, static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        detail::write_pod(out, static_cast<std::uint64_t>(p->w.size()));
        out.write(reinterpret_cast<const char*>(p->w.data()),
                  static_cast<std::streamsize>(p->w.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("save_model: write failed: " + path);
}

// Loads weights into an already constructed model; shapes must match.
inline ModelMeta load_model(const std::string& path, std::uint32_t expected_kind,
                            const std::vector<Param*>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kMagic, 4) != 0)
        throw std::runtime_error("load_model: not a stegsan weight file: " + path);
    std::uint32_t version = 0;
    detail::read_pod(in, version);
    if (version != detail::kVersion)
        throw std::runtime_error("load_model: unsupported version " + std::to_string(version));
    ModelMeta meta;
    detail::read_pod(in, meta.kind);
    detail::read_pod(in, meta.seed);
    detail::read_pod(in, meta.horizon);
    detail::read_pod(in, meta.schedule_kind);
    detail::read_pod(in, meta.channels);
    detail::read_pod(in, meta.height);
    detail::read_pod(in, meta.width);
    detail::read_pod(in, meta.hyper1);
    detail::read_pod(in, meta.hyper2);
    if (meta.kind != expected_kind)
        throw std::runtime_error("load_model: wrong model kind in " + path);
    std::uint32_t count = 0;
    detail::read_pod(in, count);
    if (count != params.size())
        throw std::runtime_error("load_model: parameter count mismatch in " + path);
    for (Param* p : params) {
        std::uint64_t n = 0;
        detail::read_pod(in, n);
        if (n != p->w.size())
            throw std::runtime_error("load_model: parameter size mismatch in " + path);
        in.read(reinterpret_cast<char*>(p->w.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw std::runtime_error("load_model: truncated weights in " + path);
    }
    return meta;
}

// Header-only peek, used to construct a matching model before loading.
inline ModelMeta read_model_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_model_meta: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kMagic, 4) != 0)
        throw std::runtime_error("read_model_meta: not a stegsan weight file: " + path);
    std::uint32_t version = 0;
    detail::read_pod(in, version);
    if (version != detail::kVersion)
        throw std::runtime_error("read_model_meta: unsupported version " +
                                 std::to_string(version));
    ModelMeta meta;
    detail::read_pod(in, meta.kind);
    detail::read_pod(in, meta.seed);
    detail::read_pod(in, meta.horizon);
    detail::read_pod(in, meta.schedule_kind);
    detail::read_pod(in, meta.channels);
    detail::read_pod(in, meta.height);
    detail::read_pod(in, meta.width);
    detail::read_pod(in, meta.hyper1);
    detail::read_pod(in, meta.hyper2);
    return meta;
}

}  // namespace stegsan::nn
