#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blockctm/color.hpp"
#include "blockctm/image.hpp"

namespace blockctm::ctm {

/// 3x3 coefficients indexed [row][col]; row 0 is the pixel row above.
using Template = std::array<std::array<double, 3>, 3>;
using TemplateBank = std::array<Template, 8>;

inline constexpr int kMapsPerChannel = 8;
inline constexpr int kChannels = 3;
/// mean + stddev for 8 maps over 3 channels.
inline constexpr int kValuesPerBlock = 2 * kMapsPerChannel * kChannels;

/// The eight local Fourier templates. Template 1 is the all-ones ring with
/// a zero center; templates 2-8 sum to zero.
[[nodiscard]] const TemplateBank& template_bank() noexcept;

struct CharacteristicMapSet {
    std::array<Plane, kMapsPerChannel> maps;
};

/// Correlates `plane` with every template (no kernel flip), replicating the
/// border pixels outward. Each map has the dimensions of the plane.
[[nodiscard]] CharacteristicMapSet apply_templates(const Plane& plane,
                                                   const TemplateBank& bank = template_bank());

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;  // population
    bool empty = false;
};

/// Moments of `map` over the foreground pixels of `mask` inside `region`.
/// An empty selection yields (0, 0) with `empty` set.
[[nodiscard]] Moments masked_moments(const Plane& map, const SegMask& mask, const Rect& region);

/// Grid side g in {1, 2, 4, 8}, i.e. B = g^2 in {1, 4, 16, 64} blocks.
class BlockScheme {
public:
    explicit BlockScheme(int grid_side);
    /// From the block count B; throws ConfigError unless B is 1, 4, 16 or 64.
    static BlockScheme from_block_count(int blocks);

    [[nodiscard]] int grid_side() const noexcept { return g_; }
    [[nodiscard]] int block_count() const noexcept { return g_ * g_; }
    [[nodiscard]] std::size_t feature_length() const noexcept {
        return static_cast<std::size_t>(kValuesPerBlock) * block_count();
    }

    /// Row-major tiling of `box`; when a side is not divisible by g the
    /// earlier blocks get the extra pixel. Blocks may be empty when the
    /// box is smaller than g.
    [[nodiscard]] std::vector<Rect> partition(const Rect& box) const;

    friend bool operator==(const BlockScheme&, const BlockScheme&) = default;

private:
    int g_;
};

/// Layout: block-major, then channel (x1, x2, x3), then map 1..8, then
/// (mean, stddev).
struct FeatureVector {
    int grid_side = 1;
    std::vector<double> values;
    std::vector<std::uint8_t> empty_blocks;
};

/// Characteristic maps of all three chroma planes, computed once per image.
struct ChromaMaps {
    int width = 0;
    int height = 0;
    std::array<CharacteristicMapSet, kChannels> channels;
};

[[nodiscard]] ChromaMaps compute_maps(const color::ChromaImage& img);

/// Tight bounding box of the foreground; empty Rect when there is none.
[[nodiscard]] Rect foreground_bbox(const SegMask& mask);

/// 48 values for one region. `empty` reports whether no foreground pixel
/// falls inside it.
[[nodiscard]] std::array<double, kValuesPerBlock> ctm_vector(const ChromaMaps& maps,
                                                             const SegMask& mask,
                                                             const Rect& region,
                                                             bool* empty = nullptr);
[[nodiscard]] std::array<double, kValuesPerBlock> ctm_vector(const color::ChromaImage& img,
                                                             const SegMask& mask,
                                                             const Rect& region);

/// Partitions the foreground bounding box per `scheme` and concatenates
/// the per-block CTM vectors. Throws PreconditionError for an empty mask.
[[nodiscard]] FeatureVector extract_block_features(const ChromaMaps& maps, const SegMask& mask,
                                                   const BlockScheme& scheme);
[[nodiscard]] FeatureVector extract_block_features(const color::ChromaImage& img,
                                                   const SegMask& mask,
                                                   const BlockScheme& scheme);

}  // namespace blockctm::ctm
