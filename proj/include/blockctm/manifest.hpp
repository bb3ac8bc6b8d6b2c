#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace blockctm::eval {

/// A data set listing. On disk it is comma-separated text with a header
/// line naming the columns `image,class[,seeds][,mask]`; empty optional
/// fields mean "absent". Relative paths resolve against the manifest's
/// directory.
struct DatasetManifest {
    struct Entry {
        std::string id;  // image path as written in the manifest
        std::filesystem::path image;
        std::string class_name;
        int class_index = 0;
        std::optional<std::filesystem::path> seeds;
        std::optional<std::filesystem::path> mask;
    };

    std::vector<Entry> entries;
    /// Sorted class names; `Entry::class_index` indexes this table.
    std::vector<std::string> class_names;

    [[nodiscard]] std::vector<int> labels() const;
};

struct ManifestOptions {
    bool check_paths = true;
    /// Every class must have at least this many images.
    std::size_t min_per_class = 2;
};

[[nodiscard]] DatasetManifest parse_manifest(const std::string& text,
                                             const std::filesystem::path& base_dir,
                                             const ManifestOptions& options = {});
[[nodiscard]] DatasetManifest load_manifest(const std::filesystem::path& path,
                                            const ManifestOptions& options = {});

/// Inverse of parse_manifest for entries whose paths are relative to
/// `base_dir`.
[[nodiscard]] std::string format_manifest(const DatasetManifest& manifest,
                                          const std::filesystem::path& base_dir);

}  // namespace blockctm::eval
