#include "blockctm/model.hpp"

#include "blockctm/bytes.hpp"
#include "blockctm/error.hpp"

namespace blockctm::classify {

namespace {

constexpr std::uint32_t kMaxClasses = 1u << 20;

void put_vector(ByteWriter& w, const Vector& v) {
    for (double x : v) w.put_f64(x);
}

Vector get_vector(ByteReader& r, std::size_t dim) {
    r.need(dim * 8);
    Vector v(dim);
    for (double& x : v) x = r.f64();
    return v;
}

}  // namespace

ClassifierKind parse_classifier_kind(const std::string& name) {
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "pnn") return ClassifierKind::Pnn;
    if (name == "both") return ClassifierKind::Both;
    throw ConfigError("unknown classifier '" + name + "' (expected knn, pnn or both)");
}

std::string to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Pnn: return "pnn";
        case ClassifierKind::Both: return "both";
    }
    return "unknown";
}

TrainedModel train_model(const LabeledDataset& data, int grid_side, const TrainOptions& options) {
    data.validate(true);
    TrainedModel m;
    m.kind = options.kind;
    m.grid_side = grid_side;
    m.class_names = data.class_names;
    m.fusion = options.fusion;
    m.normalizer = fit_normalizer(data);
    if (options.kind != ClassifierKind::Pnn) m.knn = fit_knn(data, m.normalizer, options.k);
    if (options.kind != ClassifierKind::Knn) m.pnn = fit_pnn(data, m.normalizer, options.sigma);
    return m;
}

Prediction predict(const TrainedModel& model, std::span<const double> features) {
    Prediction p;
    if (model.knn) p.knn = knn_classify(*model.knn, features);
    if (model.pnn) p.pnn = pnn_classify(*model.pnn, features);
    if (p.knn && p.pnn) {
        p.label = fuse_decisions(*p.knn, *p.pnn, model.fusion);
    } else if (p.knn) {
        p.label = p.knn->label;
    } else if (p.pnn) {
        p.label = p.pnn->label;
    } else {
        throw PreconditionError("model contains no classifier");
    }
    return p;
}

std::vector<std::uint8_t> save_model(const TrainedModel& m) {
    const bool has_knn = m.kind != ClassifierKind::Pnn;
    const bool has_pnn = m.kind != ClassifierKind::Knn;
    if (has_knn != m.knn.has_value() || has_pnn != m.pnn.has_value()) {
        throw PreconditionError("model kind does not match its classifiers");
    }
    const std::size_t dim = m.normalizer.dim();

    ByteWriter w;
    w.put_bytes("CTMM");
    w.put_u8(kModelFormatVersion);
    w.put_u8(static_cast<std::uint8_t>(m.kind));
    w.put_u32(static_cast<std::uint32_t>(m.grid_side));
    w.put_u8(static_cast<std::uint8_t>(m.fusion));
    w.put_u32(static_cast<std::uint32_t>(m.class_names.size()));
    for (const std::string& name : m.class_names) w.put_string(name);

    w.put_u64(dim);
    put_vector(w, m.normalizer.mean());
    put_vector(w, m.normalizer.divisor());

    if (has_knn) {
        w.put_u32(static_cast<std::uint32_t>(m.knn->k));
        w.put_u64(m.knn->samples.size());
        for (std::size_t i = 0; i < m.knn->samples.size(); ++i) {
            w.put_u32(static_cast<std::uint32_t>(m.knn->labels[i]));
            put_vector(w, m.knn->samples[i]);
        }
    }
    if (has_pnn) {
        if (m.pnn->classes.size() != m.class_names.size()) {
            throw PreconditionError("PNN class count does not match class names");
        }
        w.put_f64(m.pnn->sigma);
        for (const auto& patterns : m.pnn->classes) {
            w.put_u64(patterns.size());
            for (const auto& p : patterns) {
                w.put_f64(p.weight);
                put_vector(w, p.x);
            }
        }
    }
    return w.take();
}

TrainedModel load_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "model file");
    if (r.raw(4) != "CTMM") throw FormatError("model file: bad magic (expected CTMM)");
    const std::uint8_t version = r.u8();
    if (version != kModelFormatVersion) {
        throw FormatError("model file: version mismatch (file has " + std::to_string(version) +
                          ", reader supports " + std::to_string(kModelFormatVersion) + ")");
    }

    TrainedModel m;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 3) throw FormatError("model file: unknown classifier kind " + std::to_string(kind));
    m.kind = static_cast<ClassifierKind>(kind);
    m.grid_side = static_cast<int>(r.u32());
    if (m.grid_side != 1 && m.grid_side != 2 && m.grid_side != 4 && m.grid_side != 8) {
        throw FormatError("model file: invalid block grid side " + std::to_string(m.grid_side));
    }
    const std::uint8_t fusion = r.u8();
    if (fusion > 1) throw FormatError("model file: unknown fusion rule " + std::to_string(fusion));
    m.fusion = static_cast<FusionRule>(fusion);

    const std::uint32_t classes = r.u32();
    if (classes == 0 || classes > kMaxClasses) throw FormatError("model file: invalid class count");
    for (std::uint32_t c = 0; c < classes; ++c) m.class_names.push_back(r.string());

    const std::uint64_t dim64 = r.u64();
    if (dim64 == 0 || dim64 > r.remaining() / 16) throw FormatError("model file: invalid dimension");
    const auto dim = static_cast<std::size_t>(dim64);
    Vector mean = get_vector(r, dim);
    Vector divisor = get_vector(r, dim);
    try {
        m.normalizer = Normalizer(std::move(mean), std::move(divisor));
    } catch (const Error& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }

    if (m.kind != ClassifierKind::Pnn) {
        KnnModel knn;
        knn.normalizer = m.normalizer;
        knn.class_count = static_cast<int>(classes);
        knn.k = static_cast<int>(r.u32());
        const std::uint64_t n = r.u64();
        if (n == 0 || n > r.remaining() / (4 + 8 * dim)) throw FormatError("model file: invalid sample count");
        if (knn.k < 1 || static_cast<std::uint64_t>(knn.k) > n) throw FormatError("model file: invalid k");
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint32_t label = r.u32();
            if (label >= classes) throw FormatError("model file: sample label out of range");
            knn.labels.push_back(static_cast<int>(label));
            knn.samples.push_back(get_vector(r, dim));
        }
        m.knn = std::move(knn);
    }
    if (m.kind != ClassifierKind::Knn) {
        PnnModel pnn;
        pnn.normalizer = m.normalizer;
        pnn.sigma = r.f64();
        if (!(pnn.sigma > 0.0)) throw FormatError("model file: invalid PNN sigma");
        pnn.classes.resize(classes);
        for (auto& patterns : pnn.classes) {
            const std::uint64_t n = r.u64();
            if (n == 0 || n > r.remaining() / (8 + 8 * dim)) throw FormatError("model file: invalid pattern count");
            for (std::uint64_t i = 0; i < n; ++i) {
                PnnModel::Pattern p;
                p.weight = r.f64();
                if (!(p.weight > 0.0)) throw FormatError("model file: invalid pattern weight");
                p.x = get_vector(r, dim);
                patterns.push_back(std::move(p));
            }
        }
        m.pnn = std::move(pnn);
    }
    if (!r.at_end()) throw FormatError("model file: trailing bytes after payload");
    return m;
}

}  // namespace blockctm::classify
