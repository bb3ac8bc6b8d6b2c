#include "blockctm/ctm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace blockctm::ctm {

namespace {

constexpr double kR = std::numbers::sqrt2 / 2.0;

// Transcribed from the printed template table, row by row.
constexpr TemplateBank kBank = {{
    {{{1, 1, 1}, {1, 0, 1}, {1, 1, 1}}},
    {{{-1, 1, -1}, {1, 0, 1}, {-1, 1, -1}}},
    {{{-kR, 0, kR}, {-1, 0, 1}, {-kR, 0, kR}}},
    {{{-kR, -1, -kR}, {0, 0, 0}, {kR, 1, kR}}},
    {{{0, -1, 0}, {1, 0, 1}, {0, -1, 0}}},
    {{{1, 0, -1}, {0, 0, 0}, {-1, 0, 1}}},
    {{{kR, 0, -kR}, {-1, 0, 1}, {kR, 0, -kR}}},
    {{{-kR, 1, -kR}, {0, 0, 0}, {kR, -1, kR}}},
}};

struct Tap {
    int dx;
    int dy;
    double weight;  // magnitude
};

// Positive and negative taps of one template, each ordered by magnitude so
// that a constant input sums both halves identically.
struct SplitTemplate {
    std::vector<Tap> pos;
    std::vector<Tap> neg;
};

SplitTemplate split(const Template& t) {
    SplitTemplate s;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double w = t[r][c];
            if (w > 0) s.pos.push_back({c - 1, r - 1, w});
            if (w < 0) s.neg.push_back({c - 1, r - 1, -w});
        }
    }
    auto by_weight = [](const Tap& a, const Tap& b) { return a.weight < b.weight; };
    std::stable_sort(s.pos.begin(), s.pos.end(), by_weight);
    std::stable_sort(s.neg.begin(), s.neg.end(), by_weight);
    return s;
}

// Pairwise sum; exact for up to 8 equal power-of-two-multiple terms.
double tree_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    const std::size_t half = n / 2;
    return tree_sum(v, half) + tree_sum(v + half, n - half);
}

double sum_taps(const std::vector<Tap>& taps, const Plane& plane, int x, int y) {
    double terms[9];
    const int w = plane.width();
    const int h = plane.height();
    for (std::size_t k = 0; k < taps.size(); ++k) {
        const int sx = std::clamp(x + taps[k].dx, 0, w - 1);
        const int sy = std::clamp(y + taps[k].dy, 0, h - 1);
        terms[k] = taps[k].weight * plane(sx, sy);
    }
    return tree_sum(terms, taps.size());
}

std::array<int, 9> split_lengths(int length, int g) {
    std::array<int, 9> sizes{};
    const int base = length / g;
    const int extra = length % g;
    for (int i = 0; i < g; ++i) sizes[i] = base + (i < extra ? 1 : 0);
    return sizes;
}

}  // namespace

const TemplateBank& template_bank() noexcept { return kBank; }

CharacteristicMapSet apply_templates(const Plane& plane, const TemplateBank& bank) {
    if (plane.empty()) throw DimensionError("cannot filter an empty plane");
    CharacteristicMapSet out;
    for (int k = 0; k < kMapsPerChannel; ++k) {
        const SplitTemplate taps = split(bank[k]);
        Plane map(plane.width(), plane.height());
        for (int y = 0; y < plane.height(); ++y) {
            for (int x = 0; x < plane.width(); ++x) {
                map(x, y) = sum_taps(taps.pos, plane, x, y) - sum_taps(taps.neg, plane, x, y);
            }
        }
        out.maps[k] = std::move(map);
    }
    return out;
}

Moments masked_moments(const Plane& map, const SegMask& mask, const Rect& region) {
    if (!map.same_shape(mask.labels)) throw DimensionError("map and mask dimensions differ");
    if (region.empty()) return {0.0, 0.0, true};
    if (region.x0 < 0 || region.y0 < 0 || region.x0 + region.width > map.width() ||
        region.y0 + region.height > map.height()) {
        throw PreconditionError("moment region lies outside the map");
    }

    // Shifted by the first selected value so constant maps are exact.
    bool have_shift = false;
    double shift = 0.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = region.y0; y < region.y0 + region.height; ++y) {
        for (int x = region.x0; x < region.x0 + region.width; ++x) {
            if (!mask.is_foreground(x, y)) continue;
            if (!have_shift) {
                shift = map(x, y);
                have_shift = true;
            }
            sum += map(x, y) - shift;
            ++n;
        }
    }
    if (n == 0) return {0.0, 0.0, true};

    const double mean = shift + sum / static_cast<double>(n);
    double sq = 0.0;
    for (int y = region.y0; y < region.y0 + region.height; ++y) {
        for (int x = region.x0; x < region.x0 + region.width; ++x) {
            if (!mask.is_foreground(x, y)) continue;
            const double d = map(x, y) - mean;
            sq += d * d;
        }
    }
    return {mean, std::sqrt(sq / static_cast<double>(n)), false};
}

BlockScheme::BlockScheme(int grid_side) : g_(grid_side) {
    if (g_ != 1 && g_ != 2 && g_ != 4 && g_ != 8) {
        throw ConfigError("block grid side must be 1, 2, 4 or 8, got " + std::to_string(grid_side));
    }
}

BlockScheme BlockScheme::from_block_count(int blocks) {
    switch (blocks) {
        case 1: return BlockScheme(1);
        case 4: return BlockScheme(2);
        case 16: return BlockScheme(4);
        case 64: return BlockScheme(8);
        default:
            throw ConfigError("block count must be 1, 4, 16 or 64, got " + std::to_string(blocks));
    }
}

std::vector<Rect> BlockScheme::partition(const Rect& box) const {
    const auto widths = split_lengths(std::max(box.width, 0), g_);
    const auto heights = split_lengths(std::max(box.height, 0), g_);
    std::vector<Rect> blocks;
    blocks.reserve(static_cast<std::size_t>(block_count()));
    int y = box.y0;
    for (int by = 0; by < g_; ++by) {
        int x = box.x0;
        for (int bx = 0; bx < g_; ++bx) {
            blocks.push_back({x, y, widths[bx], heights[by]});
            x += widths[bx];
        }
        y += heights[by];
    }
    return blocks;
}

ChromaMaps compute_maps(const color::ChromaImage& img) {
    ChromaMaps maps;
    maps.width = img.width();
    maps.height = img.height();
    for (int c = 0; c < kChannels; ++c) maps.channels[c] = apply_templates(img.channel(c));
    return maps;
}

Rect foreground_bbox(const SegMask& mask) {
    int x0 = mask.width();
    int y0 = mask.height();
    int x1 = -1;
    int y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.is_foreground(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::array<double, kValuesPerBlock> ctm_vector(const ChromaMaps& maps, const SegMask& mask,
                                               const Rect& region, bool* empty) {
    if (maps.width != mask.width() || maps.height != mask.height()) {
        throw DimensionError("image and mask dimensions differ");
    }
    std::array<double, kValuesPerBlock> out{};
    bool is_empty = true;
    std::size_t k = 0;
    for (int c = 0; c < kChannels; ++c) {
        for (int m = 0; m < kMapsPerChannel; ++m) {
            const Moments mo = masked_moments(maps.channels[c].maps[m], mask, region);
            out[k++] = mo.mean;
            out[k++] = mo.stddev;
            is_empty = mo.empty;
        }
    }
    if (empty != nullptr) *empty = is_empty;
    return out;
}

std::array<double, kValuesPerBlock> ctm_vector(const color::ChromaImage& img, const SegMask& mask,
                                               const Rect& region) {
    return ctm_vector(compute_maps(img), mask, region);
}

FeatureVector extract_block_features(const ChromaMaps& maps, const SegMask& mask,
                                     const BlockScheme& scheme) {
    const Rect box = foreground_bbox(mask);
    if (box.empty()) throw PreconditionError("segmentation mask has no foreground pixel");

    FeatureVector fv;
    fv.grid_side = scheme.grid_side();
    fv.values.reserve(scheme.feature_length());
    for (const Rect& block : scheme.partition(box)) {
        bool empty = false;
        const auto v = ctm_vector(maps, mask, block, &empty);
        fv.values.insert(fv.values.end(), v.begin(), v.end());
        fv.empty_blocks.push_back(empty ? 1 : 0);
    }
    return fv;
}

FeatureVector extract_block_features(const color::ChromaImage& img, const SegMask& mask,
                                     const BlockScheme& scheme) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw DimensionError("image and mask dimensions differ");
    }
    return extract_block_features(compute_maps(img), mask, scheme);
}

}  // namespace blockctm::ctm
