// SPDX-License-Identifier: Apache-2.0
#include "mosaic/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "mosaic/error.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

namespace {

// next whitespace-separated token; '#' starts a comment to end of line
std::string next_ppm_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty())
        throw Error("ppm: truncated header");
    return tok;
}

int parse_ppm_int(std::istream& is) {
    const std::string tok = next_ppm_token(is);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw Error(strfmt("ppm: expected integer, got '%s'", tok.c_str()));
    }
}

} // namespace

Image read_ppm(std::istream& is) {
    std::string magic(2, '\0');
    is.read(magic.data(), 2);
    if (!is || magic != "P6")
        throw Error("ppm: not a binary P6 file");
    const int w = parse_ppm_int(is);
    const int h = parse_ppm_int(is);
    const int maxval = parse_ppm_int(is);
    if (w < 1 || h < 1)
        throw Error(strfmt("ppm: bad dimensions %dx%d", w, h));
    if (maxval != 255)
        throw Error(strfmt("ppm: unsupported maxval %d (only 255)", maxval));
    // single whitespace byte separates header from payload; already
    // consumed by the tokenizer
    Image img;
    img.height = h;
    img.width = w;
    img.pixels.resize(static_cast<size_t>(h) * w * 3);
    std::vector<unsigned char> raw(static_cast<size_t>(h) * w * 3);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is)
        throw Error("ppm: truncated pixel payload");
    for (size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = raw[i] / 255.0;
    return img;
}

Image read_ppm_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(strfmt("ppm: cannot open '%s'", path.c_str()));
    return read_ppm(f);
}

void write_ppm(const Image& img, std::ostream& os) {
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_ppm_file(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(strfmt("ppm: cannot open '%s' for writing", path.c_str()));
    write_ppm(img, f);
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw Error(strfmt("resize: output %dx%d must be positive", out_h, out_w));
    Image out;
    out.height = out_h;
    out.width = out_w;
    out.pixels.resize(static_cast<size_t>(out_h) * out_w * 3);

    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;

    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const double* p00 = img.at(y0, x0);
            const double* p01 = img.at(y0, x1);
            const double* p10 = img.at(y1, x0);
            const double* p11 = img.at(y1, x1);
            double* dst = out.at(oy, ox);
            // lerp as p0 + w*(p1 - p0): exact for equal endpoints and for
            // zero weights, so same-size and constant inputs pass through
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + wx * (p01[c] - p00[c]);
                const double bot = p10[c] + wx * (p11[c] - p10[c]);
                dst[c] = std::clamp(top + wy * (bot - top), 0.0, 1.0);
            }
        }
    }
    return out;
}

Image extract_patch(const Image& canvas, const WindowRect& rect) {
    if (rect.top_px < 0 || rect.left_px < 0 || rect.top_px + rect.side_px > canvas.height ||
        rect.left_px + rect.side_px > canvas.width)
        throw Error(strfmt("extract_patch: window (%d,%d) side %d leaves the %dx%d canvas",
                           rect.top_px, rect.left_px, rect.side_px, canvas.height, canvas.width));
    Image patch;
    patch.height = rect.side_px;
    patch.width = rect.side_px;
    patch.pixels.resize(static_cast<size_t>(rect.side_px) * rect.side_px * 3);
    for (int y = 0; y < rect.side_px; ++y) {
        const double* src = canvas.at(rect.top_px + y, rect.left_px);
        std::copy(src, src + static_cast<size_t>(rect.side_px) * 3, patch.at(y, 0));
    }
    return patch;
}

} // namespace mosaic
