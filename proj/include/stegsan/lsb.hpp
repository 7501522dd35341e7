#pragma once

#include <cstdint>
#include <stdexcept>

#include "stegsan/image.hpp"

namespace stegsan {

struct LsbConfig {
    int n_bits = 4;        // image planes, [1,8]
    int n_bits_audio = 1;  // audio planes, [1,4]
};

inline void check_lsb_bits(int n_bits) {
    if (n_bits < 1 || n_bits > 8) throw std::invalid_argument("lsb: n_bits must be in [1,8]");
}

// Container pixel keeps the cover's top (8-n) bits and stores the secret's
// top n bits in the low positions.
inline ImageTensor lsb_hide(const ImageTensor& cover, const ImageTensor& secret, int n_bits) {
    check_lsb_bits(n_bits);
    if (!cover.same_shape(secret)) throw std::invalid_argument("lsb_hide: shape mismatch");
    ImageTensor out = cover;
    const unsigned keep_mask = n_bits == 8 ? 0u : (0xFFu << n_bits) & 0xFFu;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        unsigned kept = cover.data[i] & keep_mask;
        unsigned embedded = secret.data[i] >> (8 - n_bits);
        out.data[i] = static_cast<std::uint8_t>(kept | embedded);
    }
    return out;
}

// Low n bits of each container pixel, shifted back to the top.
inline ImageTensor lsb_reveal(const ImageTensor& container, int n_bits) {
    check_lsb_bits(n_bits);
    ImageTensor out = container;
    const unsigned low_mask = n_bits == 8 ? 0xFFu : (1u << n_bits) - 1u;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>((container.data[i] & low_mask) << (8 - n_bits));
    return out;
}

}  // namespace stegsan
