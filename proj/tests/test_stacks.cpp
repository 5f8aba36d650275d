// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "mosaic/error.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/stacks.hpp"

using namespace mosaic;

namespace {

FeatureCanvas random_canvas(Rng& rng, int scale, int layer, int side, int dim) {
    FeatureCanvas c;
    c.scale_id = scale;
    c.layer_id = layer;
    c.side = side;
    c.dim = dim;
    c.features.resize(static_cast<size_t>(side) * side * dim);
    for (auto& v : c.features)
        v = rng.uniform(-2.0, 2.0);
    c.weight_sums.assign(static_cast<size_t>(side) * side, 1.0);
    return c;
}

} // namespace

TEST_CASE("stacks: phase offsets enumerate lexicographically") {
    const auto offs2 = phase_offsets(2);
    REQUIRE(offs2.size() == 4);
    CHECK((offs2[0].a == 0 && offs2[0].b == 0));
    CHECK((offs2[1].a == 0 && offs2[1].b == 1));
    CHECK((offs2[2].a == 1 && offs2[2].b == 0));
    CHECK((offs2[3].a == 1 && offs2[3].b == 1));

    const auto offs1 = phase_offsets(1);
    REQUIRE(offs1.size() == 1);
    CHECK((offs1[0].a == 0 && offs1[0].b == 0));

    const auto offs3 = phase_offsets(3);
    REQUIRE(offs3.size() == 9);
    CHECK((offs3.front().a == 0 && offs3.front().b == 0));
    CHECK((offs3.back().a == 2 && offs3.back().b == 2));

    CHECK_THROWS_AS(phase_offsets(0), Error);
}

TEST_CASE("stacks: subsample walks the congruence class in raster order") {
    Rng rng(41);
    const auto canvas = random_canvas(rng, 0, 1, 4, 3);

    SUBCASE("phase (0,0) of a 4x4 canvas at f=2") {
        const auto seq = subsample(canvas, {0, 0}, 2);
        const std::vector<std::pair<int, int>> expect = {{0, 0}, {0, 2}, {2, 0}, {2, 2}};
        CHECK(seq.coords == expect);
        for (int k = 0; k < 4; ++k)
            for (int c = 0; c < 3; ++c)
                CHECK(seq.tokens[static_cast<size_t>(k) * 3 + c] ==
                      canvas.at(seq.coords[k].first, seq.coords[k].second)[c]);
    }
    SUBCASE("f=1 is the identity raster") {
        const auto seq = subsample(canvas, {0, 0}, 1);
        CHECK(seq.length() == 16);
        CHECK(seq.tokens == canvas.features);
    }
    SUBCASE("the four phases partition the tokens: 4+4+4+4 = 16") {
        size_t total = 0;
        for (const auto& off : phase_offsets(2))
            total += static_cast<size_t>(subsample(canvas, off, 2).length());
        CHECK(total == 16);
    }
}

TEST_CASE("stacks: partition is disjoint and exhaustive, values intact") {
    Rng rng(42);
    for (int f : {1, 2, 3}) {
        const auto canvas = random_canvas(rng, 0, 1, 6, 2);
        std::set<std::pair<int, int>> seen;
        size_t total = 0;
        for (const auto& off : phase_offsets(f)) {
            const auto seq = subsample(canvas, off, f);
            total += seq.coords.size();
            for (size_t k = 0; k < seq.coords.size(); ++k) {
                CHECK(seen.insert(seq.coords[k]).second); // disjoint
                for (int c = 0; c < 2; ++c)
                    CHECK(seq.tokens[k * 2 + c] ==
                          canvas.at(seq.coords[k].first, seq.coords[k].second)[c]);
            }
        }
        CHECK(total == 36); // exhaustive
    }
}

TEST_CASE("stacks: consecutive same-row elements are f columns apart") {
    Rng rng(43);
    const auto canvas = random_canvas(rng, 0, 1, 9, 1);
    for (int f : {2, 3}) {
        for (const auto& off : phase_offsets(f)) {
            const auto seq = subsample(canvas, off, f);
            for (size_t k = 1; k < seq.coords.size(); ++k) {
                if (seq.coords[k].first == seq.coords[k - 1].first)
                    CHECK(seq.coords[k].second - seq.coords[k - 1].second == f);
            }
        }
    }
}

TEST_CASE("stacks: fit_length pads with zeros or keeps the raster prefix") {
    Rng rng(44);
    SUBCASE("exact fit is unchanged") {
        // T_base 48 at f=2 gives raw length 576 = 24^2 per phase
        const auto canvas = random_canvas(rng, 0, 1, 48, 2);
        const auto seq = subsample(canvas, {0, 0}, 2);
        REQUIRE(seq.length() == 576);
        const auto stack = fit_length(seq, 576);
        CHECK(stack.raw_length == 576);
        CHECK(stack.length == 576);
        CHECK(stack.tokens == seq.tokens);
    }
    SUBCASE("short sequences gain zero vectors at the tail") {
        const auto canvas = random_canvas(rng, 0, 1, 4, 3);
        const auto seq = subsample(canvas, {0, 0}, 2); // raw length 4
        const auto stack = fit_length(seq, 6);
        CHECK(stack.raw_length == 4);
        CHECK(stack.length == 6);
        CHECK(std::equal(seq.tokens.begin(), seq.tokens.end(), stack.tokens.begin()));
        for (size_t k = seq.tokens.size(); k < stack.tokens.size(); ++k)
            CHECK(stack.tokens[k] == 0.0);
        CHECK(stack.coords.size() == 4);
    }
    SUBCASE("long sequences keep the first raster elements") {
        const auto canvas = random_canvas(rng, 0, 1, 6, 2);
        const auto seq = subsample(canvas, {0, 0}, 2); // raw length 9
        const auto stack = fit_length(seq, 4);
        CHECK(stack.raw_length == 9);
        CHECK(stack.length == 4);
        CHECK(std::equal(stack.tokens.begin(), stack.tokens.end(), seq.tokens.begin()));
        CHECK(stack.coords.size() == 4);
    }
}

TEST_CASE("stacks: bank cardinality is |S| * |L| * f^2") {
    Rng rng(45);
    auto build = [&rng](int scales, int layers, int f) {
        std::map<std::pair<int, int>, FeatureCanvas> canvases;
        for (int s = 0; s < scales; ++s)
            for (int l = 1; l <= layers; ++l)
                canvases.emplace(std::make_pair(s, l), random_canvas(rng, s, l, 4, 2));
        return build_bank(canvases, f, 4);
    };
    CHECK(build(2, 3, 2).stacks.size() == 24);
    CHECK(build(1, 1, 1).stacks.size() == 1);
    CHECK(build(2, 3, 3).stacks.size() == 54);
}

TEST_CASE("stacks: bank ordering is lexicographic over (scale, layer, a, b)") {
    Rng rng(46);
    std::map<std::pair<int, int>, FeatureCanvas> canvases;
    for (int s : {0, 1})
        for (int l : {1, 2, 3})
            canvases.emplace(std::make_pair(s, l), random_canvas(rng, s, l, 4, 2));
    const auto bank = build_bank(canvases, 2, 4);
    REQUIRE(bank.stacks.size() == 24);
    size_t k = 0;
    for (int s : {0, 1})
        for (int l : {1, 2, 3})
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    CHECK(bank.stacks[k].scale_id == s);
                    CHECK(bank.stacks[k].layer_id == l);
                    CHECK(bank.stacks[k].phase.a == a);
                    CHECK(bank.stacks[k].phase.b == b);
                    ++k;
                }
}

TEST_CASE("stacks: missing canvas names the (scale, layer) pair") {
    Rng rng(47);
    std::map<std::pair<int, int>, FeatureCanvas> canvases;
    canvases.emplace(std::make_pair(0, 1), random_canvas(rng, 0, 1, 4, 2));
    canvases.emplace(std::make_pair(1, 2), random_canvas(rng, 1, 2, 4, 2));
    // scale 0 is missing layer 2 and scale 1 is missing layer 1
    CHECK_THROWS_WITH_AS(build_bank(canvases, 2, 4),
                         "build_bank: missing canvas for scale 0 layer 2", Error);
}

TEST_CASE("stacks: identical canvases build bit-identical banks") {
    Rng rng(48);
    std::map<std::pair<int, int>, FeatureCanvas> canvases;
    for (int s : {0, 1})
        canvases.emplace(std::make_pair(s, 1), random_canvas(rng, s, 1, 6, 3));
    const auto bank_a = build_bank(canvases, 2, 9);
    const auto bank_b = build_bank(canvases, 2, 9);
    REQUIRE(bank_a.stacks.size() == bank_b.stacks.size());
    for (size_t k = 0; k < bank_a.stacks.size(); ++k)
        CHECK(bank_a.stacks[k].tokens == bank_b.stacks[k].tokens);
}
