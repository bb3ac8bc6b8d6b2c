#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockctm/classifiers.hpp"
#include "blockctm/ctm.hpp"
#include "blockctm/manifest.hpp"
#include "blockctm/segmentation.hpp"

namespace blockctm::eval {

struct SplitSpec {
    std::vector<double> fractions{0.70, 0.50, 0.30};
    int repetitions = 5;
    std::uint64_t seed = 42;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, floor(fraction * n_c) training items (at least one) drawn
/// uniformly; the rest are test items. Both lists come back sorted.
/// Throws PreconditionError naming any class that would end up with an
/// empty side.
[[nodiscard]] Split stratified_split(std::span<const int> labels,
                                     const std::vector<std::string>& class_names, double fraction,
                                     std::uint64_t run_seed);
[[nodiscard]] Split stratified_split(const DatasetManifest& manifest, double fraction,
                                     std::uint64_t run_seed);

enum class Method { Pnn, Knn, Fusion };
[[nodiscard]] std::string method_name(Method m);
[[nodiscard]] Method parse_method_name(const std::string& name);

/// With `grid` set, each run picks sigma from `candidates` by an internal
/// 80/20 stratified validation over its training part (first best wins);
/// otherwise `fixed` is used.
struct SigmaPolicy {
    double fixed = classify::kDefaultPnnSigma;
    bool grid = false;
    std::vector<double> candidates{0.1, 0.25, 0.5, 1.0};
};

struct ExperimentConfig {
    std::vector<int> grid_sides{1};
    SplitSpec split;
    std::vector<Method> methods{Method::Pnn, Method::Knn};
    SigmaPolicy sigma;
    classify::FusionRule fusion = classify::FusionRule::KnnPriority;
    int k = 1;
    /// Diagnostic mode: every image is both training and test item.
    bool train_equals_test = false;
    bool cache_features = true;
    /// Used when an entry has seeds but no precomputed mask.
    graphcut::SegmentParams segmentation;
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct EvalCell {
    int blocks = 1;  // B, not g
    double fraction = 0.0;
    Method method = Method::Knn;
    std::vector<double> runs;  // percent, in run order
    double max = 0.0;
    double min = 0.0;
    double avg = 0.0;
    /// confusion[true][predicted], summed over runs.
    std::vector<std::vector<long>> confusion;
    /// sigma chosen in each run (PNN / fusion cells only).
    std::vector<double> sigmas;

    /// Recomputes max/min/avg from `runs`.
    void summarize();
};

struct EvalReport {
    std::vector<std::string> class_names;
    std::vector<EvalCell> cells;
    bool train_equals_test = false;

    [[nodiscard]] const EvalCell* find(int blocks, double fraction, Method method) const;
};

/// Produces the feature vector of item `index` under block scheme `g`.
using FeatureSource = std::function<ctm::FeatureVector(std::size_t index, int grid_side)>;

/// Core protocol over an abstract feature source. Feature vectors are
/// fetched once per (item, scheme) when caching is enabled, otherwise in
/// every run.
[[nodiscard]] EvalReport run_experiment(std::span<const int> labels,
                                        const std::vector<std::string>& class_names,
                                        const FeatureSource& features,
                                        const ExperimentConfig& config);

/// Loads each manifest image, takes its mask (precomputed mask, else a
/// segmentation of its seeds, else the whole frame) and extracts features.
[[nodiscard]] EvalReport run_experiment(const DatasetManifest& manifest, const ExperimentConfig& config);

/// Feature vectors of one manifest entry for each requested grid side.
[[nodiscard]] std::vector<ctm::FeatureVector> extract_entry_features(
    const DatasetManifest::Entry& entry, std::span<const int> grid_sides,
    const graphcut::SegmentParams& segmentation);

}  // namespace blockctm::eval
