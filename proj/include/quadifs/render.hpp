#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadifs/core.hpp"

namespace quadifs {

enum class RenderMode { Classic, Idempotent, Attractor };

class DegenerateRegion : public std::runtime_error {
public:
    DegenerateRegion() : std::runtime_error("render region has zero width or height") {}
};

class MalformedDump : public std::runtime_error {
public:
    explicit MalformedDump(std::size_t line, const std::string& what)
        : std::runtime_error("tree dump line " + std::to_string(line) + ": " + what) {}
};

// Row-major greyscale raster, top row first.
struct ImageGrid {
    int width = 0;
    int height = 0;
    Region region;
    std::vector<std::uint8_t> pixels;

    std::uint8_t& at(int px, int py) { return pixels[static_cast<std::size_t>(py) * width + px]; }
    std::uint8_t at(int px, int py) const {
        return pixels[static_cast<std::size_t>(py) * width + px];
    }
};

namespace detail {

inline int to_pixel(double v, double lo, double hi, int cells) {
    const int p = static_cast<int>(std::floor((v - lo) / (hi - lo) * cells));
    return std::min(std::max(p, 0), cells - 1);
}

}  // namespace detail

// Project points onto a width x height grid over `region`, north up. Pixel
// value encodes the weight: Attractor paints plain support at 255; Idempotent
// maps log-densities [p_min, 0] onto [64, 255]; Classic maps masses
// (0, p_max] onto [64, 255]. The darkest support shade is forced to 64 so
// support never fades into the background. Colliding points keep the
// brightest value, which makes the result independent of buffer order.
inline ImageGrid rasterize(const PointBuffer& buffer, Region region, int width, int height,
                           RenderMode mode) {
    if (width < 1 || height < 1) throw std::invalid_argument("image needs width, height >= 1");
    if (region.b - region.a == 0.0 || region.d - region.c == 0.0) throw DegenerateRegion();

    ImageGrid img;
    img.width = width;
    img.height = height;
    img.region = region;
    img.pixels.assign(static_cast<std::size_t>(width) * height, 0);

    const double neg_inf = -std::numeric_limits<double>::infinity();
    double p_min = 0.0;  // faintest finite log-density
    double p_max = 0.0;  // heaviest mass
    if (mode == RenderMode::Idempotent) {
        p_min = std::numeric_limits<double>::infinity();
        for (const WeightedPoint& w : buffer.items)
            if (w.p != neg_inf) p_min = std::min(p_min, w.p);
    } else if (mode == RenderMode::Classic) {
        for (const WeightedPoint& w : buffer.items) p_max = std::max(p_max, w.p);
    }

    for (const WeightedPoint& w : buffer.items) {
        int shade = 0;
        switch (mode) {
            case RenderMode::Attractor:
                shade = 255;
                break;
            case RenderMode::Idempotent: {
                if (w.p == neg_inf) continue;
                if (p_min == 0.0) {
                    shade = 255;  // every weight is 0, nothing to grade
                } else {
                    double t = (w.p - p_min) / (0.0 - p_min);
                    t = std::min(std::max(t, 0.0), 1.0);
                    shade = 64 + static_cast<int>(std::lround(t * 191.0));
                }
                break;
            }
            case RenderMode::Classic: {
                if (w.p <= 0.0 || p_max <= 0.0) continue;
                double t = w.p / p_max;
                t = std::min(std::max(t, 0.0), 1.0);
                shade = 64 + static_cast<int>(std::lround(t * 191.0));
                break;
            }
        }
        const int px = detail::to_pixel(w.x, region.a, region.b, width);
        const int py = detail::to_pixel(-w.y, -region.d, -region.c, height);
        std::uint8_t& cell = img.at(px, py);
        cell = std::max<int>(cell, shade);
    }
    return img;
}

// Draw the bounding rectangle of every node in a tree dump over the image at
// shade 128 (kept below the measure's brightest shades). Dump lines follow
// the tree's text format: depth quadrant-path a b c d n_points. Returns the
// number of rectangles drawn.
inline int overlay_quadtree(ImageGrid& img, std::istream& dump) {
    const Region& reg = img.region;
    if (reg.b - reg.a == 0.0 || reg.d - reg.c == 0.0) throw DegenerateRegion();

    auto paint = [&img](int px, int py) {
        std::uint8_t& cell = img.at(px, py);
        cell = std::max<int>(cell, 128);
    };

    int drawn = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(dump, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream in(line);
        unsigned long depth = 0;
        std::string path;
        double a, b, c, d;
        unsigned long count = 0;
        if (!(in >> depth >> path >> a >> b >> c >> d >> count))
            throw MalformedDump(line_no, "expected: depth path a b c d n_points");
        std::string trailing;
        if (in >> trailing) throw MalformedDump(line_no, "trailing tokens");
        if (path != "-") {
            for (char ch : path)
                if (ch < '0' || ch > '3') throw MalformedDump(line_no, "bad quadrant path");
            if (path.size() != depth) throw MalformedDump(line_no, "path length != depth");
        } else if (depth != 0) {
            throw MalformedDump(line_no, "root line must have depth 0");
        }

        const int px0 = detail::to_pixel(a, reg.a, reg.b, img.width);
        const int px1 = detail::to_pixel(b, reg.a, reg.b, img.width);
        const int py0 = detail::to_pixel(-d, -reg.d, -reg.c, img.height);
        const int py1 = detail::to_pixel(-c, -reg.d, -reg.c, img.height);
        for (int px = px0; px <= px1; ++px) {
            paint(px, py0);
            paint(px, py1);
        }
        for (int py = py0; py <= py1; ++py) {
            paint(px0, py);
            paint(px1, py);
        }
        ++drawn;
    }
    return drawn;
}

inline void write_pgm(const ImageGrid& img, std::ostream& os) {
    os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_pgm(const ImageGrid& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_pgm(img, out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace quadifs
