// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mosaic/geometry.hpp"

namespace mosaic {

/// RGB image with values in [0, 1]; layout (y * width + x) * 3 + c.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels; // height * width * 3

    double* at(int y, int x) {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    const double* at(int y, int x) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
};

/// Binary PPM (P6, maxval 255 only); values map to [0,1] as v / 255.
Image read_ppm(std::istream& is);
Image read_ppm_file(const std::string& path);
void write_ppm(const Image& img, std::ostream& os);
void write_ppm_file(const Image& img, const std::string& path);

/// Bilinear resize with half-pixel centers (sample k maps to source
/// coordinate (k + 0.5) * in/out - 0.5). Same-size resize is bit-exact.
Image resize_bilinear(const Image& img, int out_h, int out_w);

/// Exact pixel crop of a window rect; no interpolation.
Image extract_patch(const Image& canvas, const WindowRect& rect);

} // namespace mosaic
