#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "blockctm/color.hpp"
#include "blockctm/image.hpp"

namespace blockctm::io {

using Bytes = std::vector<std::uint8_t>;

/// Decoded 8-bit samples, interleaved, `channels` is 1 (gray) or 3 (RGB).
/// Alpha is discarded and 16-bit samples are reduced to 8 bits on decode.
struct Raster8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> samples;
    friend bool operator==(const Raster8&, const Raster8&) = default;
};

[[nodiscard]] Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// PNG or binary PPM (P6), detected by signature. Everything else is a
/// FormatError.
[[nodiscard]] Raster8 decode_image(std::span<const std::uint8_t> bytes);
[[nodiscard]] Bytes encode_png(const Raster8& raster);
[[nodiscard]] Bytes encode_ppm(const Raster8& raster);

[[nodiscard]] RgbImage to_rgb(const Raster8& raster);
/// Rounds each channel to the nearest 8-bit level.
[[nodiscard]] Raster8 from_rgb(const RgbImage& img);

[[nodiscard]] RgbImage read_rgb_image(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& img);

/// Seed masks are single-channel PNG with 0 = Unknown, 1 = Foreground,
/// 2 = Background; any other sample value is rejected.
[[nodiscard]] SeedMask decode_seed_mask(std::span<const std::uint8_t> bytes);
[[nodiscard]] SeedMask read_seed_mask(const std::filesystem::path& path);
[[nodiscard]] Bytes encode_seed_mask(const SeedMask& seeds);

/// Segmentation masks are single-channel PNG, 0 = Background and
/// 255 = Foreground. Decoding also accepts any nonzero value as foreground.
[[nodiscard]] Bytes encode_seg_mask(const SegMask& mask);
[[nodiscard]] SegMask decode_seg_mask(std::span<const std::uint8_t> bytes);
[[nodiscard]] SegMask read_seg_mask(const std::filesystem::path& path);

/// Debug dump of the chroma planes as three 8-bit PGM files
/// `<prefix>_x1.pgm` etc. Each header records the affine map used:
/// `# blockctm scale=<s> offset=<o>` with sample = round((value - o) * s).
void write_chroma_debug(const color::ChromaImage& img, const std::filesystem::path& prefix);

}  // namespace blockctm::io
