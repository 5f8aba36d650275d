// SPDX-License-Identifier: Apache-2.0
#include "mosaic/kernels.hpp"

#include <cstdlib>
#include <string>

#include "mosaic/error.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic::kernels {

// defined in kernels_avx2.cpp; null when the target has no AVX2 build
const Ops* avx2_ops_table();

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops* table_for(Backend b) {
    switch (b) {
    case Backend::scalar:
        return &scalar_ops();
    case Backend::avx2:
        return avx2_ops_table();
    }
    return nullptr;
}

Backend detect_default() {
    if (const char* env = std::getenv("MOSAIC_KERNELS")) {
        const std::string v = env;
        if (v == "scalar")
            return Backend::scalar;
        if (v == "avx2") {
            if (!supported(Backend::avx2))
                throw Error("MOSAIC_KERNELS=avx2 requested but AVX2 is not available on this host");
            return Backend::avx2;
        }
        throw Error(strfmt("unknown MOSAIC_KERNELS value '%s' (expected scalar|avx2)", v.c_str()));
    }
    return supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = detect_default();
    return b;
}

} // namespace

bool supported(Backend b) {
    if (b == Backend::scalar)
        return true;
    return avx2_ops_table() != nullptr && cpu_has_avx2();
}

const char* backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

const Ops& active() { return *table_for(current()); }

Backend active_backend() { return current(); }

void force(Backend b) {
    if (!supported(b))
        throw Error(strfmt("kernel backend '%s' not supported on this host", backend_name(b)));
    current() = b;
}

void reset() { current() = detect_default(); }

} // namespace mosaic::kernels
