#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockctm/error.hpp"

namespace blockctm {

/// Row-major 2-D raster of T. Dimensions are fixed at construction.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw DimensionError("grid dimensions must be positive, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
    template <class U>
    [[nodiscard]] bool same_shape(const Grid<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Channels are reals in [0,1]; decoders map 8-bit samples by /255.
using RgbImage = Grid<Rgb>;
using Plane = Grid<double>;

/// Pixel rectangle [x0, x0+width) x [y0, y0+height). May be empty.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    [[nodiscard]] bool empty() const noexcept { return width <= 0 || height <= 0; }
    [[nodiscard]] long long area() const noexcept {
        return empty() ? 0 : static_cast<long long>(width) * height;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

enum class SeedLabel : std::uint8_t { Unknown = 0, Foreground = 1, Background = 2 };
enum class Label : std::uint8_t { Background = 0, Foreground = 1 };

using SeedMask = Grid<SeedLabel>;

/// Binary segmentation output; `energy` is the minimized objective value
/// (zero for masks read from disk or built by hand).
struct SegMask {
    Grid<Label> labels;
    double energy = 0.0;

    [[nodiscard]] int width() const noexcept { return labels.width(); }
    [[nodiscard]] int height() const noexcept { return labels.height(); }
    [[nodiscard]] bool is_foreground(int x, int y) const noexcept {
        return labels(x, y) == Label::Foreground;
    }
    [[nodiscard]] std::size_t foreground_count() const noexcept;

    /// Every pixel foreground.
    static SegMask full(int width, int height);
};

inline std::size_t SegMask::foreground_count() const noexcept {
    std::size_t n = 0;
    for (Label l : labels.values()) n += (l == Label::Foreground);
    return n;
}

inline SegMask SegMask::full(int width, int height) {
    return SegMask{Grid<Label>(width, height, Label::Foreground), 0.0};
}

}  // namespace blockctm
