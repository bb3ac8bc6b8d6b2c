#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockctm/ctm.hpp"

namespace blockctm::ctm {

struct FeatureRecord {
    std::string image_id;
    std::string label;
    FeatureVector features;
};

/// Tab-separated table: a header line `id label g f0 ... f{n-1}` followed
/// by one line per record. Values are printed with 17 significant digits
/// so parsing recovers them exactly. All records must share one scheme.
[[nodiscard]] std::string write_feature_table(std::span<const FeatureRecord> records);
[[nodiscard]] std::vector<FeatureRecord> read_feature_table(const std::string& text);

/// Binary layout (little-endian):
///   "CTMF" | u8 version | u32 grid side | u32 dimension | u32 record count
///   per record: string id | string label | u8[B] empty flags | f64[dimension]
/// where string is u32 length + bytes.
inline constexpr std::uint8_t kFeatureFormatVersion = 1;
[[nodiscard]] std::vector<std::uint8_t> write_feature_binary(std::span<const FeatureRecord> records);
[[nodiscard]] std::vector<FeatureRecord> read_feature_binary(std::span<const std::uint8_t> bytes);

}  // namespace blockctm::ctm
