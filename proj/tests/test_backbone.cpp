// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mosaic/backbone.hpp"
#include "mosaic/error.hpp"
#include "mosaic/rng.hpp"

using namespace mosaic;

namespace {

Image constant_image(int h, int w, double r, double g, double b) {
    Image img;
    img.height = h;
    img.width = w;
    img.pixels.resize(static_cast<size_t>(h) * w * 3);
    for (int i = 0; i < h * w; ++i) {
        img.pixels[static_cast<size_t>(i) * 3 + 0] = r;
        img.pixels[static_cast<size_t>(i) * 3 + 1] = g;
        img.pixels[static_cast<size_t>(i) * 3 + 2] = b;
    }
    return img;
}

Image random_image(Rng& rng, int h, int w) {
    Image img;
    img.height = h;
    img.width = w;
    img.pixels.resize(static_cast<size_t>(h) * w * 3);
    for (auto& v : img.pixels)
        v = rng.uniform();
    return img;
}

} // namespace

TEST_CASE("backbone: bilinear resize") {
    Rng rng(51);
    SUBCASE("same-size resize is bit-identical") {
        const auto img = random_image(rng, 7, 9);
        const auto out = resize_bilinear(img, 7, 9);
        CHECK(out.pixels == img.pixels);
    }
    SUBCASE("constant image stays constant at any size") {
        const auto img = constant_image(6, 6, 0.3, 0.7, 0.1);
        for (auto [h, w] : {std::pair{3, 3}, {12, 12}, {5, 9}, {1, 1}}) {
            const auto out = resize_bilinear(img, h, w);
            for (int i = 0; i < h * w; ++i) {
                CHECK(out.pixels[static_cast<size_t>(i) * 3 + 0] == 0.3);
                CHECK(out.pixels[static_cast<size_t>(i) * 3 + 1] == 0.7);
                CHECK(out.pixels[static_cast<size_t>(i) * 3 + 2] == 0.1);
            }
        }
    }
    SUBCASE("2x2 checkerboard averages to 0.5") {
        Image img;
        img.height = 2;
        img.width = 2;
        img.pixels = {0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0};
        const auto out = resize_bilinear(img, 1, 1);
        for (int c = 0; c < 3; ++c)
            CHECK(out.pixels[c] == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("output stays inside [0,1]") {
        const auto img = random_image(rng, 13, 5);
        const auto out = resize_bilinear(img, 31, 17);
        for (double v : out.pixels) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("backbone: extract_patch crops exactly") {
    Rng rng(52);
    const auto img = random_image(rng, 16, 16);
    SUBCASE("full-canvas rect is the identity") {
        WindowRect rect;
        rect.side_px = 16;
        const auto out = extract_patch(img, rect);
        CHECK(out.pixels == img.pixels);
    }
    SUBCASE("overlapping crops share bit-identical pixels") {
        WindowRect r1, r2;
        r1.top_px = 0;
        r1.left_px = 0;
        r1.side_px = 8;
        r2.top_px = 0;
        r2.left_px = 4; // 50% horizontal overlap with r1
        r2.side_px = 8;
        const auto a = extract_patch(img, r1);
        const auto b = extract_patch(img, r2);
        for (int y = 0; y < 8; ++y)
            for (int x = 4; x < 8; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(a.at(y, x)[c] == b.at(y, x - 4)[c]);
    }
    SUBCASE("paper-geometry profile window is a 336x336 crop") {
        const auto canvas = constant_image(672, 672, 0.5, 0.5, 0.5);
        const auto cfg = GridConfig::make(672, 14, 8);
        const auto rects = enumerate_windows(plan_scale(cfg, 336.0));
        const auto crop = extract_patch(canvas, rects[4]);
        CHECK(crop.height == 336);
        CHECK(crop.width == 336);
    }
    SUBCASE("out-of-bounds rect throws") {
        WindowRect rect;
        rect.top_px = 10;
        rect.left_px = 10;
        rect.side_px = 8;
        CHECK_THROWS_AS(extract_patch(img, rect), Error);
    }
}

TEST_CASE("backbone: encode_patch") {
    const auto bp = BackboneParams::make(7, 6, 4, 16, {1, 2, 3});
    Rng rng(53);

    SUBCASE("deterministic in (patch, seed)") {
        const auto patch = random_image(rng, 16, 16);
        const auto a = encode_patch(patch, bp);
        const auto b = encode_patch(patch, bp);
        for (int l : {1, 2, 3})
            CHECK(a.at(l).data == b.at(l).data);
    }
    SUBCASE("shape contract: grid side * p == encoder input side") {
        const auto patch = random_image(rng, 10, 20); // resized internally
        const auto grids = encode_patch(patch, bp);
        for (int l : {1, 2, 3}) {
            CHECK(grids.at(l).side * bp.patch_side == bp.input_side);
            CHECK(grids.at(l).dim == 6);
        }
    }
    SUBCASE("zero image gives per-layer constant grids from the bias path") {
        const auto patch = constant_image(16, 16, 0.0, 0.0, 0.0);
        const auto grids = encode_patch(patch, bp);
        // expected: run the affine stack on the zero pixel vector by hand
        std::vector<double> cur(6, 0.0);
        std::vector<double> zero_pixels(static_cast<size_t>(4) * 4 * 3, 0.0);
        for (int layer = 1; layer <= 3; ++layer) {
            std::vector<double> next(6);
            const auto& blk = bp.blocks[static_cast<size_t>(layer) - 1];
            for (int r = 0; r < 6; ++r) {
                double acc = blk.b[r];
                const auto& src = layer == 1 ? zero_pixels : cur;
                for (size_t c = 0; c < src.size(); ++c)
                    acc += blk.w[static_cast<size_t>(r) * src.size() + c] * src[c];
                next[r] = std::tanh(acc);
            }
            cur = next;
            const auto& g = grids.at(layer);
            for (int u = 0; u < g.side; ++u)
                for (int v = 0; v < g.side; ++v)
                    for (int c = 0; c < 6; ++c)
                        CHECK(g.at(u, v)[c] == doctest::Approx(cur[c]).epsilon(1e-12));
        }
    }
    SUBCASE("distinct patches produce distinct features at every layer") {
        const auto p1 = random_image(rng, 16, 16);
        const auto p2 = random_image(rng, 16, 16);
        const auto g1 = encode_patch(p1, bp);
        const auto g2 = encode_patch(p2, bp);
        for (int l : {1, 2, 3})
            CHECK(g1.at(l).data != g2.at(l).data);
    }
    SUBCASE("different layers are different functions, across seeds") {
        for (uint64_t seed : {7u, 8u, 9u, 10u}) {
            const auto params = BackboneParams::make(seed, 6, 4, 16, {1, 2, 3});
            const auto patch = random_image(rng, 16, 16);
            const auto grids = encode_patch(patch, params);
            CHECK(grids.at(1).data != grids.at(2).data);
            CHECK(grids.at(2).data != grids.at(3).data);
        }
    }
    SUBCASE("bad encoder side is rejected at construction") {
        CHECK_THROWS_AS(BackboneParams::make(7, 6, 4, 18, {1}), ConfigError);
        CHECK_THROWS_AS(BackboneParams::make(7, 6, 4, 16, {}), ConfigError);
        CHECK_THROWS_AS(BackboneParams::make(7, 6, 4, 16, {0, 1}), ConfigError);
    }
}

TEST_CASE("backbone: encode_global") {
    SUBCASE("full-size token arithmetic: side 336, p 14 gives 576 tokens") {
        const auto bp = BackboneParams::make(3, 4, 14, 336, {1});
        const auto img = constant_image(64, 64, 0.2, 0.4, 0.6);
        const auto tokens = encode_global(img, bp, 336, 336);
        CHECK(tokens.size() == 576u * 4u);
    }
    SUBCASE("toy profile: side 32, p 8 gives 16 tokens") {
        const auto bp = BackboneParams::make(3, 5, 8, 32, {1, 2});
        Rng rng(54);
        const auto img = random_image(rng, 48, 48);
        const auto tokens = encode_global(img, bp, 32, 32);
        CHECK(tokens.size() == 16u * 5u);
    }
    SUBCASE("constant image gives equal tokens") {
        const auto bp = BackboneParams::make(9, 5, 8, 32, {1, 2});
        const auto img = constant_image(40, 40, 0.8, 0.1, 0.3);
        const auto tokens = encode_global(img, bp, 32, 32);
        for (size_t t = 1; t < 16; ++t)
            for (size_t c = 0; c < 5; ++c)
                CHECK(tokens[t * 5 + c] == tokens[c]);
    }
    SUBCASE("uses the deepest configured block") {
        const auto bp = BackboneParams::make(9, 5, 8, 32, {1, 2});
        Rng rng(55);
        const auto img = random_image(rng, 32, 32);
        const auto tokens = encode_global(img, bp, 32, 32);
        const auto grids = encode_patch(img, bp);
        // the global path on an identical 32x32 input must equal layer 2
        const auto& deep = grids.at(2);
        for (int u = 0; u < 4; ++u)
            for (int v = 0; v < 4; ++v)
                for (int c = 0; c < 5; ++c)
                    CHECK(tokens[(static_cast<size_t>(u) * 4 + v) * 5 + c] == deep.at(u, v)[c]);
    }
    SUBCASE("non-divisible low-res side throws") {
        const auto bp = BackboneParams::make(9, 5, 8, 32, {1});
        const auto img = constant_image(32, 32, 0.5, 0.5, 0.5);
        CHECK_THROWS_AS(encode_global(img, bp, 30, 32), Error);
    }
}

TEST_CASE("backbone: pool_grid mean-pools token blocks") {
    Rng rng(56);
    PatchFeatureGrid g;
    g.side = 4;
    g.dim = 3;
    g.data.resize(48);
    for (auto& v : g.data)
        v = rng.uniform(-1.0, 1.0);

    SUBCASE("factor 1 is the identity") {
        const auto out = pool_grid(g, 4);
        CHECK(out.data == g.data);
    }
    SUBCASE("4x4 to 2x2 matches the block-mean oracle") {
        const auto out = pool_grid(g, 2);
        REQUIRE(out.side == 2);
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v)
                for (int c = 0; c < 3; ++c) {
                    double mean = 0.0;
                    for (int du = 0; du < 2; ++du)
                        for (int dv = 0; dv < 2; ++dv)
                            mean += g.at(2 * u + du, 2 * v + dv)[c];
                    mean /= 4.0;
                    CHECK(out.at(u, v)[c] == doctest::Approx(mean).epsilon(1e-14));
                }
    }
    SUBCASE("non-divisible target side throws") {
        CHECK_THROWS_AS(pool_grid(g, 3), Error);
    }
}
