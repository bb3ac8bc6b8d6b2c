#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockctm::classify {

using Vector = std::vector<double>;

struct LabeledDataset {
    std::vector<Vector> features;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    [[nodiscard]] std::size_t size() const noexcept { return features.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return features.empty() ? 0 : features.front().size(); }
    [[nodiscard]] int class_count() const noexcept { return static_cast<int>(class_names.size()); }

    /// Checks N >= 1, a common dimension and labels in [0, C). With
    /// `require_every_class` each class must also have a sample.
    void validate(bool require_every_class) const;
};

/// Per-dimension z-score parameters. Dimensions whose training standard
/// deviation falls below kStddevFloor are divided by the floor instead.
class Normalizer {
public:
    static constexpr double kStddevFloor = 1e-9;

    Normalizer() = default;
    Normalizer(Vector mean, Vector divisor);

    [[nodiscard]] std::size_t dim() const noexcept { return mean_.size(); }
    [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
    [[nodiscard]] const Vector& divisor() const noexcept { return divisor_; }

    [[nodiscard]] Vector apply(std::span<const double> x) const;
    [[nodiscard]] Vector invert(std::span<const double> z) const;

private:
    Vector mean_;
    Vector divisor_;
};

/// Population mean / stddev per column. Identical rows are merged and
/// weighted by multiplicity, so duplicating the data set reproduces the
/// parameters bit for bit.
[[nodiscard]] Normalizer fit_normalizer(const LabeledDataset& data);

struct KnnModel {
    Normalizer normalizer;
    std::vector<Vector> samples;  // normalized
    std::vector<int> labels;
    int k = 1;
    int class_count = 0;
};

struct KnnResult {
    int label = 0;
    double nearest_distance = 0.0;  // Euclidean, normalized space
    int class_count = 0;
};

[[nodiscard]] KnnModel fit_knn(const LabeledDataset& data, int k = 1);
[[nodiscard]] KnnModel fit_knn(const LabeledDataset& data, const Normalizer& normalizer, int k = 1);

/// k = 1: label of the nearest training sample, exact ties resolved toward
/// the lowest training index. k > 1: majority vote over the k nearest, vote
/// ties resolved toward the class met first in distance order.
[[nodiscard]] KnnResult knn_classify(const KnnModel& model, std::span<const double> x);

struct PnnModel {
    struct Pattern {
        Vector x;  // normalized
        double weight = 1.0;  // multiplicity
    };
    Normalizer normalizer;
    double sigma = 0.5;
    std::vector<std::vector<Pattern>> classes;
};

struct PnnResult {
    int label = 0;
    /// ln f_c(x) per class; finite even where f_c underflows.
    std::vector<double> log_densities;
    std::vector<double> densities;
};

inline constexpr double kDefaultPnnSigma = 0.5;

[[nodiscard]] PnnModel fit_pnn(const LabeledDataset& data, double sigma = kDefaultPnnSigma);
[[nodiscard]] PnnModel fit_pnn(const LabeledDataset& data, const Normalizer& normalizer, double sigma);

/// f_c(x) = mean over class c of exp(-|x - x_i|^2 / (2 sigma^2)) in
/// normalized space; label = argmax, ties toward the lowest class id.
[[nodiscard]] PnnResult pnn_classify(const PnnModel& model, std::span<const double> x);

enum class FusionRule : std::uint8_t { KnnPriority = 0, MajorityWithKnnTiebreak = 1 };

[[nodiscard]] FusionRule parse_fusion_rule(const std::string& name);
[[nodiscard]] std::string to_string(FusionRule rule);

/// knn-priority returns the KNN label. majority-with-knn-tiebreak returns
/// the majority label, which with two voters is the shared label when they
/// agree and the KNN label otherwise. Throws PreconditionError when the two
/// results disagree on the number of classes.
[[nodiscard]] int fuse_decisions(const KnnResult& knn, const PnnResult& pnn,
                                 FusionRule rule = FusionRule::KnnPriority);

}  // namespace blockctm::classify
