#include "blockctm/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace blockctm::graphcut {

namespace {

constexpr int kMaxBins = 64;

void check_bins(int bins) {
    if (bins < 1 || bins > kMaxBins) {
        throw PreconditionError("histogram bins must be in [1, " + std::to_string(kMaxBins) +
                                "], got " + std::to_string(bins));
    }
}

void check_image_shape(const color::ChromaImage& img, int w, int h, const char* what) {
    if (img.width() != w || img.height() != h) {
        throw DimensionError(std::string(what) + " is " + std::to_string(w) + "x" +
                             std::to_string(h) + " but the image is " +
                             std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
}

// Normalizes raw counts with add-one smoothing.
std::vector<double> smooth(const std::vector<double>& counts, double n) {
    const double denom = n + static_cast<double>(counts.size());
    std::vector<double> hist(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) hist[i] = (counts[i] + 1.0) / denom;
    return hist;
}

double squared_distance(const color::ChromaVector& a, const color::ChromaVector& b) {
    const double d1 = a.x1 - b.x1;
    const double d2 = a.x2 - b.x2;
    const double d3 = a.x3 - b.x3;
    return d1 * d1 + d2 * d2 + d3 * d3;
}

// Visits each unordered 8-neighbor pair once: right, down-left, down,
// down-right of every pixel in row-major order.
template <class F>
void for_each_neighbor_pair(int w, int h, F&& visit) {
    constexpr int offsets[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (const auto& o : offsets) {
                const int nx = x + o[0];
                const int ny = y + o[1];
                if (nx < 0 || nx >= w || ny >= h) continue;
                visit(x, y, nx, ny, o[0] != 0 && o[1] != 0);
            }
        }
    }
}

// Marks every pixel 8-adjacent to a marked pixel.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& set, int w, int h) {
    std::vector<std::uint8_t> out(set);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!set[static_cast<std::size_t>(y) * w + x]) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx >= 0 && ny >= 0 && nx < w && ny < h) {
                        out[static_cast<std::size_t>(ny) * w + nx] = 1;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

std::size_t AppearanceModel::bin_of(const color::ChromaVector& c) const noexcept {
    auto index = [this](double u) {
        const int b = static_cast<int>(std::floor(u * bins));
        return static_cast<std::size_t>(std::clamp(b, 0, bins - 1));
    };
    const std::size_t n = static_cast<std::size_t>(bins);
    return (index((c.x1 + 1.0) / 2.0) * n + index((c.x2 + 1.0) / 2.0)) * n + index(c.x3);
}

void check_seeds(const color::ChromaImage& img, const SeedMask& seeds) {
    check_image_shape(img, seeds.width(), seeds.height(), "seed mask");
    bool fg = false;
    bool bg = false;
    for (SeedLabel s : seeds.values()) {
        fg = fg || s == SeedLabel::Foreground;
        bg = bg || s == SeedLabel::Background;
    }
    if (!fg) throw PreconditionError("seed mask has no foreground seed");
    if (!bg) throw PreconditionError("seed mask has no background seed");
}

AppearanceModel estimate_seed_models(const color::ChromaImage& img, const SeedMask& seeds, int bins) {
    check_bins(bins);
    check_seeds(img, seeds);
    AppearanceModel model{bins, {}, {}};
    const std::size_t cells = static_cast<std::size_t>(bins) * bins * bins;
    std::vector<double> fg(cells, 0.0);
    std::vector<double> bg(cells, 0.0);
    double nfg = 0.0;
    double nbg = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const SeedLabel s = seeds(x, y);
            if (s == SeedLabel::Foreground) {
                fg[model.bin_of(img.at(x, y))] += 1.0;
                nfg += 1.0;
            } else if (s == SeedLabel::Background) {
                bg[model.bin_of(img.at(x, y))] += 1.0;
                nbg += 1.0;
            }
        }
    }
    model.fg_hist = smooth(fg, nfg);
    model.bg_hist = smooth(bg, nbg);
    return model;
}

AppearanceModel estimate_label_models(const color::ChromaImage& img, const Grid<Label>& labels,
                                      std::span<const std::uint8_t> labeled, int bins) {
    check_bins(bins);
    check_image_shape(img, labels.width(), labels.height(), "label grid");
    if (labeled.size() != labels.size()) throw DimensionError("labeled-set size mismatch");
    AppearanceModel model{bins, {}, {}};
    const std::size_t cells = static_cast<std::size_t>(bins) * bins * bins;
    std::vector<double> fg(cells, 0.0);
    std::vector<double> bg(cells, 0.0);
    double nfg = 0.0;
    double nbg = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const std::size_t i = labels.index(x, y);
            if (!labeled[i]) continue;
            const std::size_t b = model.bin_of(img.at(x, y));
            if (labels[i] == Label::Foreground) {
                fg[b] += 1.0;
                nfg += 1.0;
            } else {
                bg[b] += 1.0;
                nbg += 1.0;
            }
        }
    }
    model.fg_hist = smooth(fg, nfg);
    model.bg_hist = smooth(bg, nbg);
    return model;
}

double default_sigma_c(const color::ChromaImage& img) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for_each_neighbor_pair(img.width(), img.height(), [&](int x, int y, int nx, int ny, bool) {
        sum += std::sqrt(squared_distance(img.at(x, y), img.at(nx, ny)));
        ++pairs;
    });
    const double mean = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
    return mean > 0.0 ? mean : 1.0;
}

PixelGraph build_energy(const color::ChromaImage& img, const SeedMask& seeds,
                        const AppearanceModel& model, double lambda, double sigma_c) {
    check_image_shape(img, seeds.width(), seeds.height(), "seed mask");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw PreconditionError("lambda must be finite and nonnegative");
    }
    if (!(sigma_c > 0.0) || !std::isfinite(sigma_c)) {
        throw PreconditionError("sigma_c must be finite and positive");
    }

    const int w = img.width();
    const int h = img.height();
    PixelGraph g;
    g.width = w;
    g.height = h;
    g.source_cap.assign(seeds.size(), 0.0);
    g.sink_cap.assign(seeds.size(), 0.0);

    double finite_total = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = seeds.index(x, y);
            if (seeds[i] != SeedLabel::Unknown) continue;
            const color::ChromaVector c = img.at(x, y);
            g.source_cap[i] = -std::log(model.bg(c));
            g.sink_cap[i] = -std::log(model.fg(c));
            finite_total += g.source_cap[i] + g.sink_cap[i];
        }
    }

    const double two_sigma_sq = 2.0 * sigma_c * sigma_c;
    for_each_neighbor_pair(w, h, [&](int x, int y, int nx, int ny, bool diagonal) {
        const double weight = std::exp(-squared_distance(img.at(x, y), img.at(nx, ny)) / two_sigma_sq);
        const double cap = lambda * weight / (diagonal ? std::numbers::sqrt2 : 1.0);
        g.edges.push_back({static_cast<int>(seeds.index(x, y)), static_cast<int>(seeds.index(nx, ny)), cap});
        finite_total += cap;
    });

    g.infinite_cap = 1.0 + finite_total;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (seeds[i] == SeedLabel::Foreground) g.source_cap[i] = g.infinite_cap;
        if (seeds[i] == SeedLabel::Background) g.sink_cap[i] = g.infinite_cap;
    }
    return g;
}

double labeling_energy(const PixelGraph& graph, const Grid<Label>& labels) {
    if (labels.size() != graph.pixel_count()) throw DimensionError("labeling size mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        e += labels[i] == Label::Foreground ? graph.sink_cap[i] : graph.source_cap[i];
    }
    for (const NeighborEdge& edge : graph.edges) {
        if (labels[edge.p] != labels[edge.q]) e += edge.cap;
    }
    return e;
}

Grid<Label> solve_cut(const PixelGraph& graph, std::span<const std::uint8_t> active) {
    const std::size_t n = graph.pixel_count();
    if (!active.empty() && active.size() != n) throw DimensionError("active-set size mismatch");
    auto is_active = [&](std::size_t i) { return active.empty() || active[i] != 0; };

    std::vector<int> node_of(n, -1);
    int nodes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_active(i)) node_of[i] = nodes++;
    }

    FlowGraph flow(nodes);
    for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] >= 0) flow.add_terminal(node_of[i], graph.source_cap[i], graph.sink_cap[i]);
    }
    for (const NeighborEdge& e : graph.edges) {
        const int a = node_of[e.p];
        const int b = node_of[e.q];
        if (a >= 0 && b >= 0 && e.cap > 0.0) flow.add_edge(a, b, e.cap, e.cap);
    }

    const FlowResult cut = max_flow_min_cut(flow);
    Grid<Label> labels(graph.width, graph.height, Label::Background);
    for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] >= 0 && cut.side[node_of[i]] == Side::Source) labels[i] = Label::Foreground;
    }
    return labels;
}

SegmentResult segment_iterated(const color::ChromaImage& img, const SeedMask& seeds,
                               const SegmentParams& params) {
    check_seeds(img, seeds);
    check_bins(params.bins);
    if (params.max_rounds < 0) throw PreconditionError("max_rounds must be nonnegative");

    SegmentResult result;
    result.sigma_c = params.sigma_c ? *params.sigma_c : default_sigma_c(img);

    const int w = img.width();
    const int h = img.height();
    const std::size_t n = seeds.size();

    std::vector<std::uint8_t> seeded(n);
    for (std::size_t i = 0; i < n; ++i) seeded[i] = seeds[i] != SeedLabel::Unknown;

    AppearanceModel model = estimate_seed_models(img, seeds, params.bins);
    std::vector<std::uint8_t> labeled(n, 0);
    Grid<Label> labels(w, h, Label::Background);
    std::vector<std::uint8_t> active = dilate(seeded, w, h);

    for (int round = 1; round <= params.max_rounds; ++round) {
        const PixelGraph graph = build_energy(img, seeds, model, params.lambda, result.sigma_c);
        Grid<Label> next = solve_cut(graph, active);
        const bool unchanged = next == labels && active == labeled;
        labels = std::move(next);
        labeled = active;
        result.rounds = round;
        result.labeled_per_round.push_back(
            static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), std::uint8_t{1})));

        model = estimate_label_models(img, labels, labeled, params.bins);
        if (unchanged || result.labeled_per_round.back() == n) break;
        active = dilate(labeled, w, h);
    }

    const PixelGraph graph = build_energy(img, seeds, model, params.lambda, result.sigma_c);
    result.mask.labels = solve_cut(graph);
    result.mask.energy = labeling_energy(graph, result.mask.labels);
    result.final_model = std::move(model);
    return result;
}

}  // namespace blockctm::graphcut
