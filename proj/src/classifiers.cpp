#include "blockctm/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blockctm/error.hpp"

namespace blockctm::classify {

namespace {

struct Group {
    std::size_t first;  // index of the first occurrence
    double weight;
};

// Merges identical rows among `indices`, keeping first-occurrence order.
std::vector<Group> merge_duplicates(const std::vector<Vector>& rows,
                                    const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> order(indices);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows[a] < rows[b];
    });
    std::vector<Group> groups;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || rows[order[k]] != rows[order[k - 1]]) {
            groups.push_back({order[k], 0.0});
        }
        groups.back().weight += 1.0;
    }
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.first < b.first; });
    return groups;
}

void check_dim(std::size_t expected, std::size_t actual) {
    if (expected != actual) {
        throw DimensionError("feature dimension mismatch: expected " + std::to_string(expected) +
                             ", got " + std::to_string(actual));
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

}  // namespace

void LabeledDataset::validate(bool require_every_class) const {
    if (features.empty()) throw PreconditionError("data set has no samples");
    if (labels.size() != features.size()) throw PreconditionError("label count does not match sample count");
    const std::size_t d = dim();
    if (d == 0) throw PreconditionError("feature vectors are empty");
    std::vector<std::size_t> per_class(class_names.size(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        check_dim(d, features[i].size());
        if (labels[i] < 0 || labels[i] >= class_count()) {
            throw PreconditionError("label " + std::to_string(labels[i]) + " of sample " +
                                    std::to_string(i) + " is outside [0, " +
                                    std::to_string(class_count()) + ")");
        }
        ++per_class[labels[i]];
    }
    if (require_every_class) {
        for (int c = 0; c < class_count(); ++c) {
            if (per_class[c] == 0) {
                throw PreconditionError("class '" + class_names[c] + "' has no training sample");
            }
        }
    }
}

Normalizer::Normalizer(Vector mean, Vector divisor) : mean_(std::move(mean)), divisor_(std::move(divisor)) {
    if (mean_.size() != divisor_.size()) throw DimensionError("normalizer mean/divisor size mismatch");
    for (double d : divisor_) {
        if (!(d > 0.0) || !std::isfinite(d)) throw PreconditionError("normalizer divisors must be positive");
    }
}

Vector Normalizer::apply(std::span<const double> x) const {
    check_dim(dim(), x.size());
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean_[i]) / divisor_[i];
    return z;
}

Vector Normalizer::invert(std::span<const double> z) const {
    check_dim(dim(), z.size());
    Vector x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * divisor_[i] + mean_[i];
    return x;
}

Normalizer fit_normalizer(const LabeledDataset& data) {
    data.validate(false);
    const std::size_t d = data.dim();
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::vector<Group> groups = merge_duplicates(data.features, all);
    const double total = static_cast<double>(data.size());

    // Shifted by the first row so constant columns come out exact.
    const Vector& origin = data.features.front();
    Vector mean(d, 0.0);
    for (const Group& g : groups) {
        const Vector& row = data.features[g.first];
        for (std::size_t j = 0; j < d; ++j) mean[j] += g.weight * (row[j] - origin[j]);
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] = origin[j] + mean[j] / total;

    Vector divisor(d, 0.0);
    for (const Group& g : groups) {
        const Vector& row = data.features[g.first];
        for (std::size_t j = 0; j < d; ++j) {
            const double t = row[j] - mean[j];
            divisor[j] += g.weight * t * t;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(divisor[j] / total);
        divisor[j] = sd < Normalizer::kStddevFloor ? Normalizer::kStddevFloor : sd;
    }
    return Normalizer(std::move(mean), std::move(divisor));
}

KnnModel fit_knn(const LabeledDataset& data, int k) {
    return fit_knn(data, fit_normalizer(data), k);
}

KnnModel fit_knn(const LabeledDataset& data, const Normalizer& normalizer, int k) {
    data.validate(false);
    check_dim(normalizer.dim(), data.dim());
    if (k < 1 || static_cast<std::size_t>(k) > data.size()) {
        throw PreconditionError("k must be in [1, " + std::to_string(data.size()) + "], got " +
                                std::to_string(k));
    }
    KnnModel m;
    m.normalizer = normalizer;
    m.k = k;
    m.class_count = data.class_count();
    m.labels = data.labels;
    m.samples.reserve(data.size());
    for (const Vector& x : data.features) m.samples.push_back(normalizer.apply(x));
    return m;
}

KnnResult knn_classify(const KnnModel& model, std::span<const double> x) {
    if (model.samples.empty()) throw PreconditionError("KNN model has no samples");
    const Vector z = model.normalizer.apply(x);

    if (model.k == 1) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < model.samples.size(); ++i) {
            const double d = squared_distance(z, model.samples[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return {model.labels[best], std::sqrt(best_d), model.class_count};
    }

    std::vector<std::pair<double, std::size_t>> ranked(model.samples.size());
    for (std::size_t i = 0; i < model.samples.size(); ++i) {
        ranked[i] = {squared_distance(z, model.samples[i]), i};
    }
    const auto k = static_cast<std::ptrdiff_t>(model.k);
    std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end());

    std::vector<int> votes(static_cast<std::size_t>(model.class_count), 0);
    for (std::ptrdiff_t r = 0; r < k; ++r) ++votes[model.labels[ranked[r].second]];
    int label = model.labels[ranked[0].second];
    for (std::ptrdiff_t r = 0; r < k; ++r) {
        const int c = model.labels[ranked[r].second];
        if (votes[c] > votes[label]) label = c;
    }
    return {label, std::sqrt(ranked[0].first), model.class_count};
}

PnnModel fit_pnn(const LabeledDataset& data, double sigma) {
    return fit_pnn(data, fit_normalizer(data), sigma);
}

PnnModel fit_pnn(const LabeledDataset& data, const Normalizer& normalizer, double sigma) {
    data.validate(true);
    check_dim(normalizer.dim(), data.dim());
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw PreconditionError("PNN sigma must be positive, got " + std::to_string(sigma));
    }
    PnnModel m;
    m.normalizer = normalizer;
    m.sigma = sigma;
    m.classes.resize(static_cast<std::size_t>(data.class_count()));
    std::vector<std::vector<std::size_t>> members(m.classes.size());
    for (std::size_t i = 0; i < data.size(); ++i) members[data.labels[i]].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c) {
        for (const Group& g : merge_duplicates(data.features, members[c])) {
            m.classes[c].push_back({normalizer.apply(data.features[g.first]), g.weight});
        }
    }
    return m;
}

PnnResult pnn_classify(const PnnModel& model, std::span<const double> x) {
    if (model.classes.empty()) throw PreconditionError("PNN model has no classes");
    const Vector z = model.normalizer.apply(x);
    const double two_sigma_sq = 2.0 * model.sigma * model.sigma;

    PnnResult out;
    out.log_densities.resize(model.classes.size());
    out.densities.resize(model.classes.size());
    std::vector<double> d2;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        const auto& patterns = model.classes[c];
        if (patterns.empty()) throw PreconditionError("PNN class " + std::to_string(c) + " is empty");
        d2.resize(patterns.size());
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            d2[i] = squared_distance(z, patterns[i].x);
            nearest = std::min(nearest, d2[i]);
        }
        // log-sum-exp around the nearest pattern keeps small sigma finite.
        double sum = 0.0;
        double weight = 0.0;
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            sum += patterns[i].weight * std::exp(-(d2[i] - nearest) / two_sigma_sq);
            weight += patterns[i].weight;
        }
        out.log_densities[c] = std::log(sum / weight) - nearest / two_sigma_sq;
        out.densities[c] = std::exp(out.log_densities[c]);
    }
    out.label = static_cast<int>(std::max_element(out.log_densities.begin(), out.log_densities.end()) -
                                 out.log_densities.begin());
    return out;
}

FusionRule parse_fusion_rule(const std::string& name) {
    if (name == "knn-priority") return FusionRule::KnnPriority;
    if (name == "majority-with-knn-tiebreak") return FusionRule::MajorityWithKnnTiebreak;
    throw ConfigError("unknown fusion rule '" + name + "'");
}

std::string to_string(FusionRule rule) {
    return rule == FusionRule::KnnPriority ? "knn-priority" : "majority-with-knn-tiebreak";
}

int fuse_decisions(const KnnResult& knn, const PnnResult& pnn, FusionRule rule) {
    if (static_cast<std::size_t>(knn.class_count) != pnn.densities.size()) {
        throw PreconditionError("fusion inputs cover different class sets (" +
                                std::to_string(knn.class_count) + " vs " +
                                std::to_string(pnn.densities.size()) + " classes)");
    }
    switch (rule) {
        case FusionRule::KnnPriority:
            return knn.label;
        case FusionRule::MajorityWithKnnTiebreak: {
            std::vector<int> votes(pnn.densities.size(), 0);
            ++votes[knn.label];
            ++votes[pnn.label];
            const int top = *std::max_element(votes.begin(), votes.end());
            return votes[knn.label] == top ? knn.label : pnn.label;
        }
    }
    return knn.label;
}

}  // namespace blockctm::classify
