#include "blockctm/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace blockctm::color {

namespace {

void check_channel(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError(std::string("channel ") + name + " = " + std::to_string(value) +
                          " outside [0,1]");
    }
}

}  // namespace

const Plane& ChromaImage::channel(int c) const {
    switch (c) {
        case 0: return x1;
        case 1: return x2;
        case 2: return x3;
        default: throw PreconditionError("chroma channel index must be 0, 1 or 2");
    }
}

HsvPixel rgb_to_hsv(const Rgb& p) {
    check_channel(p.r, "R");
    check_channel(p.g, "G");
    check_channel(p.b, "B");

    if (p.r == p.g && p.g == p.b) {
        return {0.0, 0.0, p.r};
    }

    const double v = (p.r + p.g + p.b) / 3.0;
    const double lo = std::min({p.r, p.g, p.b});
    // v > 0 here: not all channels equal and all are nonnegative.
    const double s = std::clamp(1.0 - lo / v, 0.0, 1.0);

    const double num = std::numbers::sqrt3 * (p.g - p.b);
    const double den = (p.r - p.g) + (p.r - p.b);
    double h = 0.0;
    if (num != 0.0 || den != 0.0) {
        h = std::atan2(num, den);
        if (h <= -std::numbers::pi) h = std::numbers::pi;
    }
    return {h, s, v};
}

ChromaVector hsv_to_chroma(const HsvPixel& p) noexcept {
    const double radius = p.s * p.v;
    return {radius * std::cos(p.h), radius * std::sin(p.h), p.v};
}

ChromaImage transform_image(const RgbImage& img) {
    const int w = img.width();
    const int h = img.height();
    ChromaImage out{Plane(w, h), Plane(w, h), Plane(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            HsvPixel hsv;
            try {
                hsv = rgb_to_hsv(img(x, y));
            } catch (const DomainError& e) {
                throw DomainError(std::string(e.what()) + " at pixel (" + std::to_string(x) +
                                  ", " + std::to_string(y) + ")");
            }
            const ChromaVector c = hsv_to_chroma(hsv);
            out.x1(x, y) = c.x1;
            out.x2(x, y) = c.x2;
            out.x3(x, y) = c.x3;
        }
    }
    return out;
}

}  // namespace blockctm::color
