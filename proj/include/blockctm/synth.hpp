#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "blockctm/image.hpp"

namespace blockctm::synth {

/// Textured, colored ellipses on a green noise background. Each class has
/// its own hue, stripe period and stripe orientation; items vary in
/// position, size, rotation, hue jitter and noise.
struct BlobSpec {
    int classes = 5;
    int per_class = 40;
    int width = 48;
    int height = 48;
    std::uint64_t seed = 7;
    double noise = 0.04;  // per-channel Gaussian stddev
};

struct SynthItem {
    RgbImage image;
    SeedMask seeds;  // fg disk at the blob center, bg frame along the border
    SegMask truth;   // the ellipse
    int class_index = 0;
};

[[nodiscard]] std::string class_name(int class_index);

/// Deterministic in (spec.seed, class_index, item_index).
[[nodiscard]] SynthItem make_blob(const BlobSpec& spec, int class_index, int item_index);

/// Writes `<dir>/<class>/<item>.png`, `_seeds.png`, `_mask.png` and
/// `<dir>/manifest.csv`; returns the manifest path.
std::filesystem::path write_blob_dataset(const std::filesystem::path& dir, const BlobSpec& spec);

/// Left half color A, right half color B, one fg scribble on the left and
/// one bg scribble on the right. Truth is the left half.
[[nodiscard]] SynthItem two_tone_demo(int size = 64);

}  // namespace blockctm::synth
