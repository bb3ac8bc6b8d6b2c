#pragma once

#include "blockctm/image.hpp"

namespace blockctm::color {

/// Hue in radians on (-pi, pi]; saturation and value in [0,1].
struct HsvPixel {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
    friend bool operator==(const HsvPixel&, const HsvPixel&) = default;
};

/// (S V cos H, S V sin H, V).
struct ChromaVector {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    friend bool operator==(const ChromaVector&, const ChromaVector&) = default;
};

/// The three transformed planes of an image, all sharing its dimensions.
struct ChromaImage {
    Plane x1;
    Plane x2;
    Plane x3;

    [[nodiscard]] int width() const noexcept { return x3.width(); }
    [[nodiscard]] int height() const noexcept { return x3.height(); }
    [[nodiscard]] const Plane& channel(int c) const;
    [[nodiscard]] ChromaVector at(int x, int y) const noexcept {
        return {x1(x, y), x2(x, y), x3(x, y)};
    }
};

/// Mean-intensity HSV: V is the channel mean, S = 1 - min/V and H is the
/// opponent-axis angle atan2(sqrt(3)(G-B), 2R-G-B).
///
/// Degenerate cases: V = 0 gives S = H = 0; an achromatic pixel (R = G = B)
/// gives S = H = 0 and V = R exactly. Throws DomainError naming the channel
/// when any channel lies outside [0,1] (NaN included).
[[nodiscard]] HsvPixel rgb_to_hsv(const Rgb& pixel);

[[nodiscard]] ChromaVector hsv_to_chroma(const HsvPixel& pixel) noexcept;

/// Per-pixel rgb_to_hsv followed by hsv_to_chroma. Domain errors carry the
/// offending pixel coordinates.
[[nodiscard]] ChromaImage transform_image(const RgbImage& img);

}  // namespace blockctm::color
