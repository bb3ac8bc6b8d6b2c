#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blockctm/color.hpp"
#include "blockctm/image.hpp"
#include "blockctm/maxflow.hpp"

namespace blockctm::graphcut {

/// Foreground / background color likelihoods: add-one smoothed, normalized
/// 3-D histograms over chroma values. x1 and x2 are mapped to [0,1] by
/// (v+1)/2 before binning, x3 is binned as is.
struct AppearanceModel {
    int bins = 16;
    std::vector<double> fg_hist;
    std::vector<double> bg_hist;

    [[nodiscard]] std::size_t bin_of(const color::ChromaVector& c) const noexcept;
    [[nodiscard]] double fg(const color::ChromaVector& c) const noexcept { return fg_hist[bin_of(c)]; }
    [[nodiscard]] double bg(const color::ChromaVector& c) const noexcept { return bg_hist[bin_of(c)]; }
};

/// Histograms from seed pixels only. Throws PreconditionError naming the
/// missing class when either seed set is empty.
[[nodiscard]] AppearanceModel estimate_seed_models(const color::ChromaImage& img,
                                                   const SeedMask& seeds, int bins);

/// Histograms from an explicit labeling, restricted to pixels with
/// `labeled[i] != 0`.
[[nodiscard]] AppearanceModel estimate_label_models(const color::ChromaImage& img,
                                                    const Grid<Label>& labels,
                                                    std::span<const std::uint8_t> labeled,
                                                    int bins);

struct NeighborEdge {
    int p;
    int q;
    double cap;  // symmetric
};

/// Energy graph over the 8-connected pixel lattice. The source terminal is
/// foreground: `source_cap[p]` is paid when p is labeled background,
/// `sink_cap[p]` when p is labeled foreground. Seeded pixels carry
/// `infinite_cap` on the link enforcing their label.
struct PixelGraph {
    int width = 0;
    int height = 0;
    std::vector<double> source_cap;
    std::vector<double> sink_cap;
    std::vector<NeighborEdge> edges;
    double infinite_cap = 0.0;

    [[nodiscard]] std::size_t pixel_count() const noexcept { return source_cap.size(); }
};

/// Data term -ln P_bg on the source link and -ln P_fg on the sink link;
/// neighbor term lambda * exp(-|c_p - c_q|^2 / (2 sigma_c^2)) / dist(p, q).
[[nodiscard]] PixelGraph build_energy(const color::ChromaImage& img, const SeedMask& seeds,
                                      const AppearanceModel& model, double lambda,
                                      double sigma_c);

/// Mean chroma distance over all 8-neighbor pairs; 1.0 when that mean is
/// zero (constant or single-pixel images).
[[nodiscard]] double default_sigma_c(const color::ChromaImage& img);

/// Sum of the capacities a labeling cuts. Seed-violating labelings include
/// the sentinel and are therefore never minimal.
[[nodiscard]] double labeling_energy(const PixelGraph& graph, const Grid<Label>& labels);

/// Min cut of the sub-graph induced by pixels with `active[i] != 0`
/// (all pixels when `active` is empty). Inactive pixels come back as
/// Background and do not contribute edges.
[[nodiscard]] Grid<Label> solve_cut(const PixelGraph& graph, std::span<const std::uint8_t> active = {});

struct SegmentParams {
    double lambda = 1.0;
    std::optional<double> sigma_c;  // per-image default when absent
    int bins = 16;
    int max_rounds = 10;
};

struct SegmentResult {
    SegMask mask;
    int rounds = 0;
    double sigma_c = 0.0;
    /// Model used for the final whole-image cut.
    AppearanceModel final_model;
    /// Number of labeled pixels after each round.
    std::vector<std::size_t> labeled_per_round;
};

/// Iterated seeded graph cut. Round 1 cuts the seeds plus their 8-adjacent
/// band; every further round adds the band around the labeled set after
/// re-estimating the appearance model from the current labels. Stops when
/// everything is labeled, the labeling is unchanged, or `max_rounds` is
/// reached, then solves one whole-image cut with the latest model.
[[nodiscard]] SegmentResult segment_iterated(const color::ChromaImage& img, const SeedMask& seeds,
                                             const SegmentParams& params = {});

/// Throws PreconditionError unless seeds have at least one pixel of each
/// class and match the image size.
void check_seeds(const color::ChromaImage& img, const SeedMask& seeds);

}  // namespace blockctm::graphcut
