#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockctm/classifiers.hpp"

namespace blockctm::classify {

enum class ClassifierKind : std::uint8_t { Knn = 1, Pnn = 2, Both = 3 };

[[nodiscard]] ClassifierKind parse_classifier_kind(const std::string& name);
[[nodiscard]] std::string to_string(ClassifierKind kind);

/// What the CLI trains and the server loads: one or both classifiers over a
/// shared normalizer, plus the block scheme the features were extracted
/// with.
struct TrainedModel {
    ClassifierKind kind = ClassifierKind::Knn;
    int grid_side = 1;
    std::vector<std::string> class_names;
    Normalizer normalizer;
    std::optional<KnnModel> knn;
    std::optional<PnnModel> pnn;
    FusionRule fusion = FusionRule::KnnPriority;
};

struct TrainOptions {
    ClassifierKind kind = ClassifierKind::Knn;
    int k = 1;
    double sigma = kDefaultPnnSigma;
    FusionRule fusion = FusionRule::KnnPriority;
};

[[nodiscard]] TrainedModel train_model(const LabeledDataset& data, int grid_side,
                                       const TrainOptions& options);

struct Prediction {
    int label = 0;
    std::optional<KnnResult> knn;
    std::optional<PnnResult> pnn;
};

/// Single-classifier models return that classifier's label; `Both` fuses
/// under the model's rule.
[[nodiscard]] Prediction predict(const TrainedModel& model, std::span<const double> features);

/// Model file layout, little-endian throughout:
///   "CTMM" | u8 version | u8 kind | u32 grid side | u8 fusion rule
///   | u32 class count | class names (u32 length + bytes each)
///   | normalizer: u64 dim | f64 mean[dim] | f64 divisor[dim]
///   | KNN payload (kinds 1, 3): u32 k | u64 n | n x (u32 label | f64[dim])
///   | PNN payload (kinds 2, 3): f64 sigma | per class: u64 m | m x (f64 weight | f64[dim])
inline constexpr std::uint8_t kModelFormatVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> save_model(const TrainedModel& model);
/// Throws FormatError for bad magic, version mismatch, truncation or
/// trailing data; never returns a partial model.
[[nodiscard]] TrainedModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace blockctm::classify
