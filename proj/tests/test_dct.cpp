#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stegsan/dct.hpp"
#include "stegsan/rng.hpp"

using namespace stegsan;

namespace {

std::vector<double> random_plane(int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<double> p(static_cast<std::size_t>(h) * w);
    for (double& v : p) v = rng.uniform(0.0, 255.0);
    return p;
}

}  // namespace

TEST_CASE("DCT of a constant plane has exactly one nonzero coefficient") {
    std::vector<double> plane(16 * 16, 42.5);
    auto coeffs = dct2(plane, 16, 16);
    CHECK(coeffs[0] == Catch::Approx(42.5 * 16.0).margin(1e-9));  // DC = mean * sqrt(H*W)
    for (std::size_t i = 1; i < coeffs.size(); ++i) CHECK(std::fabs(coeffs[i]) < 1e-10);
}

TEST_CASE("DCT round-trip is the identity to double precision") {
    for (auto [h, w] : {std::pair{16, 16}, std::pair{8, 12}, std::pair{5, 7}, std::pair{1, 4}}) {
        auto plane = random_plane(h, w, 17 + h + w);
        auto back = idct2(dct2(plane, h, w), h, w);
        for (std::size_t i = 0; i < plane.size(); ++i)
            CHECK(back[i] == Catch::Approx(plane[i]).margin(1e-9));
    }
}

TEST_CASE("DCT is orthonormal (Parseval)") {
    auto plane = random_plane(12, 16, 23);
    auto coeffs = dct2(plane, 12, 16);
    double ex = 0, ec = 0;
    for (double v : plane) ex += v * v;
    for (double v : coeffs) ec += v * v;
    CHECK(ec == Catch::Approx(ex).epsilon(1e-12));
}
