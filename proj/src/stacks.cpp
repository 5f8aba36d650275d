// SPDX-License-Identifier: Apache-2.0
#include "mosaic/stacks.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <set>

#include "mosaic/error.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

std::vector<PhaseOffset> phase_offsets(int factor) {
    if (factor < 1)
        throw Error(strfmt("phase_offsets: factor %d must be >= 1", factor));
    std::vector<PhaseOffset> offs;
    offs.reserve(static_cast<size_t>(factor) * factor);
    for (int a = 0; a < factor; ++a)
        for (int b = 0; b < factor; ++b)
            offs.push_back({a, b});
    return offs;
}

PhaseSequence subsample(const FeatureCanvas& canvas, const PhaseOffset& off, int factor) {
    if (factor < 1)
        throw Error(strfmt("subsample: factor %d must be >= 1", factor));
    if (off.a < 0 || off.a >= factor || off.b < 0 || off.b >= factor)
        throw Error(strfmt("subsample: offset (%d,%d) outside [0,%d)", off.a, off.b, factor));
    PhaseSequence seq;
    seq.scale_id = canvas.scale_id;
    seq.layer_id = canvas.layer_id;
    seq.phase = off;
    seq.dim = canvas.dim;
    for (int u = off.a; u < canvas.side; u += factor) {
        for (int v = off.b; v < canvas.side; v += factor) {
            const double* tok = canvas.at(u, v);
            seq.tokens.insert(seq.tokens.end(), tok, tok + canvas.dim);
            seq.coords.emplace_back(u, v);
        }
    }
    return seq;
}

DetailStack fit_length(const PhaseSequence& seq, int target_len) {
    if (target_len < 1)
        throw Error(strfmt("fit_length: target length %d must be >= 1", target_len));
    DetailStack stack;
    stack.scale_id = seq.scale_id;
    stack.layer_id = seq.layer_id;
    stack.phase = seq.phase;
    stack.dim = seq.dim;
    stack.raw_length = seq.length();
    stack.length = target_len;
    const int kept = std::min(seq.length(), target_len);
    stack.tokens.assign(seq.tokens.begin(),
                        seq.tokens.begin() + static_cast<size_t>(kept) * seq.dim);
    stack.tokens.resize(static_cast<size_t>(target_len) * seq.dim, 0.0);
    stack.coords.assign(seq.coords.begin(), seq.coords.begin() + kept);
    return stack;
}

StackBank build_bank(const std::map<std::pair<int, int>, FeatureCanvas>& canvases,
                     int factor, int stack_len) {
    if (canvases.empty())
        throw Error("build_bank: no canvases");
    StackBank bank;
    bank.factor = factor;
    bank.stack_len = stack_len;

    std::set<int> scales, layers;
    for (const auto& [key, canvas] : canvases) {
        (void)canvas;
        scales.insert(key.first);
        layers.insert(key.second);
    }
    bank.scale_ids.assign(scales.begin(), scales.end());
    bank.layer_ids.assign(layers.begin(), layers.end());

    const auto offs = phase_offsets(factor);
    for (int s : bank.scale_ids) {
        for (int l : bank.layer_ids) {
            auto it = canvases.find({s, l});
            if (it == canvases.end())
                throw Error(strfmt("build_bank: missing canvas for scale %d layer %d", s, l));
            for (const auto& off : offs)
                bank.stacks.push_back(fit_length(subsample(it->second, off, factor), stack_len));
        }
    }
    return bank;
}

void dump_bank(const StackBank& bank, std::ostream& os) {
    auto put_u32 = [&os](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_f64 = [&os](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k)
            b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
        os.write(reinterpret_cast<const char*>(b), 8);
    };
    put_u32(static_cast<uint32_t>(bank.stacks.size()));
    for (const auto& st : bank.stacks) {
        put_u32(static_cast<uint32_t>(st.length));
        put_u32(static_cast<uint32_t>(st.dim));
        for (double v : st.tokens)
            put_f64(v);
    }
}

} // namespace mosaic
