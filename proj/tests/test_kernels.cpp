// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mosaic/error.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/rng.hpp"

using namespace mosaic;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n) {
    std::vector<double> v(n);
    for (auto& x : v)
        x = rng.uniform(-1.0, 1.0);
    return v;
}

// plain-loop references, independent of the kernel implementations
void ref_axpy(std::vector<double>& y, const std::vector<double>& x, double a) {
    for (size_t i = 0; i < y.size(); ++i)
        y[i] += a * x[i];
}

double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

struct BackendGuard {
    ~BackendGuard() { kernels::reset(); }
};

} // namespace

TEST_CASE("kernels: scalar ops match plain-loop references") {
    BackendGuard guard;
    kernels::force(kernels::Backend::scalar);
    const auto& ops = kernels::active();
    Rng rng(11);
    for (size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        auto expect = y;
        ref_axpy(expect, x, 0.37);
        ops.axpy(y.data(), x.data(), 0.37, n);
        CHECK(y == expect);

        CHECK(ops.dot(x.data(), y.data(), n) == doctest::Approx(ref_dot(x, y)).epsilon(1e-15));

        std::vector<double> out(n), expect_out(n);
        ops.add_scaled(out.data(), x.data(), y.data(), -2.5, n);
        for (size_t i = 0; i < n; ++i)
            expect_out[i] = x[i] + -2.5 * y[i];
        CHECK(out == expect_out);

        ops.hadamard(out.data(), x.data(), y.data(), n);
        for (size_t i = 0; i < n; ++i)
            expect_out[i] = x[i] * y[i];
        CHECK(out == expect_out);

        ops.scale(out.data(), x.data(), 1.75, n);
        for (size_t i = 0; i < n; ++i)
            expect_out[i] = 1.75 * x[i];
        CHECK(out == expect_out);
    }
}

TEST_CASE("kernels: gemv matches a hand-rolled matrix-vector product") {
    const auto& ops = kernels::active();
    Rng rng(12);
    for (int rows : {1, 3, 8}) {
        for (int cols : {1, 5, 17}) {
            auto w = random_vec(rng, static_cast<size_t>(rows) * cols);
            auto x = random_vec(rng, cols);
            auto b = random_vec(rng, rows);
            std::vector<double> y(rows);
            ops.gemv(y.data(), w.data(), x.data(), b.data(), rows, cols);
            for (int r = 0; r < rows; ++r) {
                double acc = b[r];
                for (int c = 0; c < cols; ++c)
                    acc += w[static_cast<size_t>(r) * cols + c] * x[c];
                CHECK(y[r] == doctest::Approx(acc).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("kernels: elementwise ops are bit-identical across backends") {
    if (!kernels::supported(kernels::Backend::avx2)) {
        MESSAGE("AVX2 unavailable on this host; backend equivalence skipped");
        return;
    }
    BackendGuard guard;
    Rng rng(13);
    for (size_t n : {1u, 2u, 4u, 5u, 8u, 15u, 64u, 129u}) {
        const auto x = random_vec(rng, n);
        const auto y0 = random_vec(rng, n);
        const double a = rng.uniform(-3.0, 3.0);

        kernels::force(kernels::Backend::scalar);
        auto ys = y0;
        kernels::active().axpy(ys.data(), x.data(), a, n);
        std::vector<double> ss(n), hs(n), cs(n);
        kernels::active().scale(ss.data(), x.data(), a, n);
        kernels::active().hadamard(hs.data(), x.data(), y0.data(), n);
        kernels::active().add_scaled(cs.data(), x.data(), y0.data(), a, n);

        kernels::force(kernels::Backend::avx2);
        auto yv = y0;
        kernels::active().axpy(yv.data(), x.data(), a, n);
        std::vector<double> sv(n), hv(n), cv(n);
        kernels::active().scale(sv.data(), x.data(), a, n);
        kernels::active().hadamard(hv.data(), x.data(), y0.data(), n);
        kernels::active().add_scaled(cv.data(), x.data(), y0.data(), a, n);

        CHECK(ys == yv);
        CHECK(ss == sv);
        CHECK(hs == hv);
        CHECK(cs == cv);
    }
}

TEST_CASE("kernels: reductions agree across backends to rounding error") {
    if (!kernels::supported(kernels::Backend::avx2)) {
        MESSAGE("AVX2 unavailable on this host; backend equivalence skipped");
        return;
    }
    BackendGuard guard;
    Rng rng(14);
    for (size_t n : {1u, 4u, 9u, 32u, 257u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        kernels::force(kernels::Backend::scalar);
        const double ds = kernels::active().dot(a.data(), b.data(), n);
        kernels::force(kernels::Backend::avx2);
        const double dv = kernels::active().dot(a.data(), b.data(), n);
        CHECK(dv == doctest::Approx(ds).epsilon(1e-12));

        const size_t rows = 7;
        const auto w = random_vec(rng, rows * n);
        const auto bias = random_vec(rng, rows);
        std::vector<double> y_s(rows), y_v(rows);
        kernels::force(kernels::Backend::scalar);
        kernels::active().gemv(y_s.data(), w.data(), a.data(), bias.data(), rows, n);
        kernels::force(kernels::Backend::avx2);
        kernels::active().gemv(y_v.data(), w.data(), a.data(), bias.data(), rows, n);
        for (size_t r = 0; r < rows; ++r)
            CHECK(y_v[r] == doctest::Approx(y_s[r]).epsilon(1e-12));
    }
}

TEST_CASE("kernels: each backend is run-to-run deterministic") {
    const auto& ops = kernels::active();
    Rng rng(15);
    const auto a = random_vec(rng, 123);
    const auto b = random_vec(rng, 123);
    const double d1 = ops.dot(a.data(), b.data(), a.size());
    const double d2 = ops.dot(a.data(), b.data(), a.size());
    CHECK(d1 == d2);
}

TEST_CASE("kernels: forcing an unsupported backend throws") {
    if (kernels::supported(kernels::Backend::avx2))
        return; // nothing unsupported to test on this host
    CHECK_THROWS_AS(kernels::force(kernels::Backend::avx2), Error);
}
