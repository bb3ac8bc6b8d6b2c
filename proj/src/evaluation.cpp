#include "blockctm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "blockctm/color.hpp"
#include "blockctm/error.hpp"
#include "blockctm/image_io.hpp"
#include "blockctm/rng.hpp"

namespace blockctm::eval {

namespace {

using classify::LabeledDataset;
using classify::Vector;

// Guards floor() against products such as 0.29 * 100 = 28.999999999999996.
constexpr double kFloorSlack = 1e-9;
constexpr std::uint64_t kValidationStream = 0x76616c6964ULL;

std::size_t training_count(double fraction, std::size_t n) {
    const auto t = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + kFloorSlack));
    return std::max<std::size_t>(t, 1);
}

std::vector<std::vector<std::size_t>> members_by_class(std::span<const int> labels, std::size_t classes,
                                                       std::span<const std::size_t> subset) {
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t i : subset) members[static_cast<std::size_t>(labels[i])].push_back(i);
    return members;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

LabeledDataset subset_dataset(const std::vector<const Vector*>& features, std::span<const int> labels,
                              const std::vector<std::string>& class_names,
                              std::span<const std::size_t> subset) {
    LabeledDataset d;
    d.class_names = class_names;
    d.features.reserve(subset.size());
    for (std::size_t i : subset) {
        d.features.push_back(*features[i]);
        d.labels.push_back(labels[i]);
    }
    return d;
}

double accuracy_of(const classify::PnnModel& model, const LabeledDataset& data) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        correct += classify::pnn_classify(model, data.features[i]).label == data.labels[i];
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Picks sigma on an internal 80/20 split of the training items. Classes
// with a single training item contribute to fitting only.
double select_sigma(const LabeledDataset& train, const SigmaPolicy& policy, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto members = members_by_class(train.labels, train.class_names.size(), all);
    std::vector<std::size_t> fit_idx;
    std::vector<std::size_t> val_idx;
    for (auto& m : members) {
        rng.shuffle(m);
        const std::size_t t = m.size() < 2 ? m.size() : std::min(training_count(0.8, m.size()), m.size() - 1);
        fit_idx.insert(fit_idx.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(t));
        val_idx.insert(val_idx.end(), m.begin() + static_cast<std::ptrdiff_t>(t), m.end());
    }
    if (val_idx.empty() || policy.candidates.empty()) return policy.fixed;
    std::sort(fit_idx.begin(), fit_idx.end());
    std::sort(val_idx.begin(), val_idx.end());

    LabeledDataset fit;
    LabeledDataset val;
    fit.class_names = val.class_names = train.class_names;
    for (std::size_t i : fit_idx) {
        fit.features.push_back(train.features[i]);
        fit.labels.push_back(train.labels[i]);
    }
    for (std::size_t i : val_idx) {
        val.features.push_back(train.features[i]);
        val.labels.push_back(train.labels[i]);
    }
    const classify::Normalizer norm = classify::fit_normalizer(fit);
    double best_sigma = policy.candidates.front();
    double best_acc = -1.0;
    for (double sigma : policy.candidates) {
        const double acc = accuracy_of(classify::fit_pnn(fit, norm, sigma), val);
        if (acc > best_acc) {
            best_acc = acc;
            best_sigma = sigma;
        }
    }
    return best_sigma;
}

}  // namespace

Split stratified_split(std::span<const int> labels, const std::vector<std::string>& class_names,
                       double fraction, std::uint64_t run_seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw PreconditionError("training fraction must lie in (0, 1), got " + std::to_string(fraction));
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= class_names.size()) {
            throw PreconditionError("label " + std::to_string(l) + " outside the class table");
        }
    }
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto members = members_by_class(labels, class_names.size(), all);

    Rng rng(run_seed);
    Split split;
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        const std::size_t t = training_count(fraction, m.size());
        if (t >= m.size()) {
            throw PreconditionError("class '" + class_names[c] + "' has " + std::to_string(m.size()) +
                                    " image(s): too few for a split at fraction " + std::to_string(fraction));
        }
        rng.shuffle(m);
        split.train.insert(split.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(t));
        split.test.insert(split.test.end(), m.begin() + static_cast<std::ptrdiff_t>(t), m.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Split stratified_split(const DatasetManifest& manifest, double fraction, std::uint64_t run_seed) {
    const std::vector<int> labels = manifest.labels();
    return stratified_split(labels, manifest.class_names, fraction, run_seed);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Pnn: return "PNN";
        case Method::Knn: return "KNN";
        case Method::Fusion: return "Fusion";
    }
    return "?";
}

Method parse_method_name(const std::string& name) {
    if (name == "PNN") return Method::Pnn;
    if (name == "KNN") return Method::Knn;
    if (name == "Fusion") return Method::Fusion;
    throw FormatError("unknown classifier column '" + name + "'");
}

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    if (grid_sides.empty()) problems.push_back("no block scheme selected");
    for (int g : grid_sides) {
        if (g != 1 && g != 2 && g != 4 && g != 8) problems.push_back("invalid block grid side " + std::to_string(g));
    }
    if (split.fractions.empty()) problems.push_back("no training fraction given");
    for (double f : split.fractions) {
        if (!(f > 0.0 && f < 1.0)) problems.push_back("training fraction " + std::to_string(f) + " outside (0, 1)");
    }
    if (split.repetitions < 1) problems.push_back("repetitions must be at least 1");
    if (methods.empty()) problems.push_back("no classifier selected");
    if (!(sigma.fixed > 0.0)) problems.push_back("PNN sigma must be positive");
    for (double s : sigma.candidates) {
        if (!(s > 0.0)) problems.push_back("sigma grid values must be positive");
    }
    if (k < 1) problems.push_back("k must be at least 1");
    if (!problems.empty()) {
        std::string msg = problems.front();
        for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
        throw ConfigError(msg);
    }
}

void EvalCell::summarize() {
    if (runs.empty()) {
        max = min = avg = 0.0;
        return;
    }
    max = *std::max_element(runs.begin(), runs.end());
    min = *std::min_element(runs.begin(), runs.end());
    avg = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
    avg = std::clamp(avg, min, max);
}

const EvalCell* EvalReport::find(int blocks, double fraction, Method method) const {
    for (const EvalCell& c : cells) {
        if (c.blocks == blocks && c.fraction == fraction && c.method == method) return &c;
    }
    return nullptr;
}

EvalReport run_experiment(std::span<const int> labels, const std::vector<std::string>& class_names,
                          const FeatureSource& features, const ExperimentConfig& config) {
    config.validate();
    const std::size_t n = labels.size();
    const std::size_t classes = class_names.size();
    if (n == 0) throw PreconditionError("data set is empty");

    const bool need_knn = std::any_of(config.methods.begin(), config.methods.end(),
                                      [](Method m) { return m != Method::Pnn; });
    const bool need_pnn = std::any_of(config.methods.begin(), config.methods.end(),
                                      [](Method m) { return m != Method::Knn; });

    // Feature store indexed [scheme][item].
    std::vector<std::vector<Vector>> store(config.grid_sides.size(), std::vector<Vector>(n));
    auto fill = [&](std::size_t s, std::span<const std::size_t> items) {
        std::vector<std::exception_ptr> errors(items.size());
        parallel_for(items.size(), config.threads, [&](std::size_t k) {
            try {
                store[s][items[k]] = features(items[k], config.grid_sides[s]).values;
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    };
    std::vector<std::size_t> everything(n);
    std::iota(everything.begin(), everything.end(), std::size_t{0});
    if (config.cache_features) {
        for (std::size_t s = 0; s < config.grid_sides.size(); ++s) fill(s, everything);
    }

    EvalReport report;
    report.class_names = class_names;
    report.train_equals_test = config.train_equals_test;
    for (int g : config.grid_sides) {
        for (double f : config.split.fractions) {
            for (Method m : config.methods) {
                EvalCell cell;
                cell.blocks = g * g;
                cell.fraction = f;
                cell.method = m;
                cell.confusion.assign(classes, std::vector<long>(classes, 0));
                report.cells.push_back(std::move(cell));
            }
        }
    }

    for (int run = 1; run <= config.split.repetitions; ++run) {
        const std::uint64_t run_seed = derive_seed(config.split.seed, static_cast<std::uint64_t>(run));
        for (std::size_t fi = 0; fi < config.split.fractions.size(); ++fi) {
            const double fraction = config.split.fractions[fi];
            const Split split = config.train_equals_test
                                    ? Split{everything, everything}
                                    : stratified_split(labels, class_names, fraction, run_seed);

            for (std::size_t s = 0; s < config.grid_sides.size(); ++s) {
                if (!config.cache_features) fill(s, everything);
                std::vector<const Vector*> rows(n);
                for (std::size_t i = 0; i < n; ++i) rows[i] = &store[s][i];

                const LabeledDataset train = subset_dataset(rows, labels, class_names, split.train);
                const classify::Normalizer norm = classify::fit_normalizer(train);
                std::optional<classify::KnnModel> knn;
                std::optional<classify::PnnModel> pnn;
                double sigma = config.sigma.fixed;
                if (need_knn) knn = classify::fit_knn(train, norm, config.k);
                if (need_pnn) {
                    if (config.sigma.grid) {
                        sigma = select_sigma(train, config.sigma, derive_seed(run_seed, kValidationStream + s));
                    }
                    pnn = classify::fit_pnn(train, norm, sigma);
                }

                for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                    const std::size_t cell_index =
                        (s * config.split.fractions.size() + fi) * config.methods.size() + mi;
                    EvalCell& cell = report.cells[cell_index];
                    std::size_t correct = 0;
                    for (std::size_t i : split.test) {
                        const Vector& x = *rows[i];
                        int predicted = 0;
                        switch (cell.method) {
                            case Method::Knn: predicted = classify::knn_classify(*knn, x).label; break;
                            case Method::Pnn: predicted = classify::pnn_classify(*pnn, x).label; break;
                            case Method::Fusion:
                                predicted = classify::fuse_decisions(classify::knn_classify(*knn, x),
                                                                     classify::pnn_classify(*pnn, x), config.fusion);
                                break;
                        }
                        correct += predicted == labels[i];
                        ++cell.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predicted)];
                    }
                    cell.runs.push_back(100.0 * static_cast<double>(correct) /
                                        static_cast<double>(split.test.size()));
                    if (cell.method != Method::Knn) cell.sigmas.push_back(sigma);
                }
            }
        }
    }
    for (EvalCell& cell : report.cells) cell.summarize();
    return report;
}

std::vector<ctm::FeatureVector> extract_entry_features(const DatasetManifest::Entry& entry,
                                                       std::span<const int> grid_sides,
                                                       const graphcut::SegmentParams& segmentation) {
    try {
        const color::ChromaImage chroma = color::transform_image(io::read_rgb_image(entry.image));
        SegMask mask;
        if (entry.mask) {
            mask = io::read_seg_mask(*entry.mask);
        } else if (entry.seeds) {
            mask = graphcut::segment_iterated(chroma, io::read_seed_mask(*entry.seeds), segmentation).mask;
        } else {
            mask = SegMask::full(chroma.width(), chroma.height());
        }
        if (mask.width() != chroma.width() || mask.height() != chroma.height()) {
            throw DimensionError("mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                                 " but the image is " + std::to_string(chroma.width()) + "x" +
                                 std::to_string(chroma.height()));
        }
        const ctm::ChromaMaps maps = ctm::compute_maps(chroma);
        std::vector<ctm::FeatureVector> out;
        for (int g : grid_sides) out.push_back(ctm::extract_block_features(maps, mask, ctm::BlockScheme(g)));
        return out;
    } catch (const ExtractionError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExtractionError(entry.id, e.what());
    }
}

EvalReport run_experiment(const DatasetManifest& manifest, const ExperimentConfig& config) {
    config.validate();
    const std::vector<int> labels = manifest.labels();
    // All schemes of one image share a single decode / segmentation pass.
    std::vector<std::vector<ctm::FeatureVector>> memo(manifest.entries.size());
    std::vector<std::once_flag> once(manifest.entries.size());
    const FeatureSource source = [&](std::size_t i, int g) {
        if (!config.cache_features) {
            const int sides[] = {g};
            return extract_entry_features(manifest.entries[i], sides, config.segmentation).front();
        }
        std::call_once(once[i], [&] {
            memo[i] = extract_entry_features(manifest.entries[i], config.grid_sides, config.segmentation);
        });
        const auto pos = std::find(config.grid_sides.begin(), config.grid_sides.end(), g) - config.grid_sides.begin();
        return memo[i][static_cast<std::size_t>(pos)];
    };
    return run_experiment(labels, manifest.class_names, source, config);
}

}  // namespace blockctm::eval
