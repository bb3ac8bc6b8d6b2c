#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blockctm/error.hpp"
#include "blockctm/segmentation.hpp"
#include "blockctm/synth.hpp"
#include "support.hpp"

using namespace blockctm;
using namespace blockctm::graphcut;
using color::ChromaImage;

namespace {

void check_seeds_preserved(const SeedMask& seeds, const SegMask& mask) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (seeds.values()[i] == SeedLabel::Foreground) CHECK(mask.labels.values()[i] == Label::Foreground);
        if (seeds.values()[i] == SeedLabel::Background) CHECK(mask.labels.values()[i] == Label::Background);
    }
}

}  // namespace

TEST_CASE("seed histograms on a single color") {
    const ChromaImage img = color::transform_image(RgbImage(5, 4, Rgb{0.7, 0.2, 0.1}));
    SeedMask seeds(5, 4);
    for (int x = 0; x < 5; ++x) seeds(x, 0) = SeedLabel::Foreground;
    seeds(0, 3) = SeedLabel::Background;
    const int bins = 8;
    const AppearanceModel m = estimate_seed_models(img, seeds, bins);
    const double cells = bins * bins * bins;
    const std::size_t b = m.bin_of(img.at(0, 0));
    CHECK(m.fg_hist[b] == doctest::Approx((5 + 1) / (5 + cells)).epsilon(1e-15));
    for (std::size_t i = 0; i < m.fg_hist.size(); ++i) {
        if (i != b) CHECK(m.fg_hist[i] == doctest::Approx(1 / (5 + cells)).epsilon(1e-15));
    }
    CHECK(std::accumulate(m.fg_hist.begin(), m.fg_hist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::accumulate(m.bg_hist.begin(), m.bg_hist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one seed per class gives permuted histograms") {
    RgbImage rgb(2, 1);
    rgb(0, 0) = {0.9, 0.1, 0.1};
    rgb(1, 0) = {0.1, 0.1, 0.9};
    const ChromaImage img = color::transform_image(rgb);
    SeedMask seeds(2, 1);
    seeds(0, 0) = SeedLabel::Foreground;
    seeds(1, 0) = SeedLabel::Background;
    AppearanceModel m = estimate_seed_models(img, seeds, 16);
    REQUIRE(m.bin_of(img.at(0, 0)) != m.bin_of(img.at(1, 0)));
    std::sort(m.fg_hist.begin(), m.fg_hist.end());
    std::sort(m.bg_hist.begin(), m.bg_hist.end());
    CHECK(m.fg_hist == m.bg_hist);
}

TEST_CASE("seed histograms match a counting oracle") {
    Rng rng(31);
    const ChromaImage img = color::transform_image(testing::random_image(12, 12, rng));
    SeedMask seeds(12, 12);
    for (int k = 0; k < 50; ++k) {
        seeds(static_cast<int>(rng.below(12)), static_cast<int>(rng.below(12))) =
            k % 2 ? SeedLabel::Foreground : SeedLabel::Background;
    }
    const int bins = 4;
    const AppearanceModel m = estimate_seed_models(img, seeds, bins);
    oracle::EnergyModel binner;
    binner.bins = bins;
    std::vector<double> fg(64, 0), bg(64, 0);
    double nf = 0, nb = 0;
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) {
            const auto c = img.at(x, y);
            const std::size_t b = binner.bin({c.x1, c.x2, c.x3});
            if (seeds(x, y) == SeedLabel::Foreground) fg[b] += 1, nf += 1;
            if (seeds(x, y) == SeedLabel::Background) bg[b] += 1, nb += 1;
        }
    }
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(m.fg_hist[i] == doctest::Approx((fg[i] + 1) / (nf + 64)).epsilon(1e-12));
        CHECK(m.bg_hist[i] == doctest::Approx((bg[i] + 1) / (nb + 64)).epsilon(1e-12));
        CHECK(m.fg_hist[i] > 0.0);
    }
}

TEST_CASE("missing seed classes are named") {
    const ChromaImage img = color::transform_image(RgbImage(3, 3, Rgb{0.5, 0.4, 0.3}));
    SeedMask only_fg(3, 3);
    only_fg(1, 1) = SeedLabel::Foreground;
    CHECK_THROWS_WITH_AS(estimate_seed_models(img, only_fg, 16), doctest::Contains("background"), PreconditionError);
    SeedMask only_bg(3, 3);
    only_bg(1, 1) = SeedLabel::Background;
    CHECK_THROWS_WITH_AS(segment_iterated(img, only_bg), doctest::Contains("foreground"), PreconditionError);
}

TEST_CASE("energy graph capacities") {
    Rng rng(8);
    const ChromaImage img = color::transform_image(testing::random_image(3, 3, rng));
    SeedMask seeds(3, 3);
    seeds(0, 0) = SeedLabel::Foreground;
    seeds(2, 2) = SeedLabel::Background;
    const AppearanceModel model = estimate_seed_models(img, seeds, 16);

    SUBCASE("lambda zero disables smoothness") {
        const PixelGraph g = build_energy(img, seeds, model, 0.0, 0.3);
        for (const NeighborEdge& e : g.edges) CHECK(e.cap == 0.0);
    }
    SUBCASE("formula oracle") {
        const double lambda = 1.7, sigma = 0.3;
        const PixelGraph g = build_energy(img, seeds, model, lambda, sigma);
        CHECK(g.edges.size() == 20u);  // 12 axis + 8 diagonal pairs
        double finite = 0.0;
        for (const NeighborEdge& e : g.edges) {
            const int px = e.p % 3, py = e.p / 3, qx = e.q % 3, qy = e.q / 3;
            REQUIRE(std::max(std::abs(px - qx), std::abs(py - qy)) == 1);
            const auto a = img.at(px, py), b = img.at(qx, qy);
            const double d2 = (a.x1 - b.x1) * (a.x1 - b.x1) + (a.x2 - b.x2) * (a.x2 - b.x2) +
                              (a.x3 - b.x3) * (a.x3 - b.x3);
            const double dist = (px != qx && py != qy) ? std::sqrt(2.0) : 1.0;
            CHECK(e.cap == doctest::Approx(lambda * std::exp(-d2 / (2 * sigma * sigma)) / dist).epsilon(1e-12));
            finite += e.cap;
        }
        for (int i = 0; i < 9; ++i) {
            if (seeds.values()[i] != SeedLabel::Unknown) continue;
            const auto c = img.at(i % 3, i / 3);
            CHECK(g.source_cap[i] == doctest::Approx(-std::log(model.bg(c))).epsilon(1e-12));
            CHECK(g.sink_cap[i] == doctest::Approx(-std::log(model.fg(c))).epsilon(1e-12));
            finite += g.source_cap[i] + g.sink_cap[i];
        }
        CHECK(g.infinite_cap == doctest::Approx(1.0 + finite).epsilon(1e-12));
        CHECK(g.source_cap[0] == g.infinite_cap);
        CHECK(g.sink_cap[8] == g.infinite_cap);
    }
}

TEST_CASE("identical neighbors get exactly lambda") {
    const ChromaImage img = color::transform_image(RgbImage(2, 1, Rgb{0.3, 0.6, 0.1}));
    SeedMask seeds(2, 1);
    seeds(0, 0) = SeedLabel::Foreground;
    seeds(1, 0) = SeedLabel::Background;
    const PixelGraph g = build_energy(img, seeds, estimate_seed_models(img, seeds, 16), 2.0, 0.123);
    REQUIRE(g.edges.size() == 1u);
    CHECK(g.edges[0].cap == 2.0);
}

TEST_CASE("4x4 instances reach the brute-force minimum") {
    Rng rng(4444);
    for (int trial = 0; trial < 20; ++trial) {
        const ChromaImage img = color::transform_image(testing::random_image(4, 4, rng));
        SeedMask seeds(4, 4);
        const int f = static_cast<int>(rng.below(16));
        int b = static_cast<int>(rng.below(15));
        if (b >= f) ++b;
        seeds.values()[f] = SeedLabel::Foreground;
        seeds.values()[b] = SeedLabel::Background;
        SegmentParams params;
        params.lambda = rng.uniform(0.2, 3.0);
        params.bins = 4;
        const SegmentResult r = segment_iterated(img, seeds, params);
        const oracle::EnergyModel e = testing::oracle_energy(img, seeds, r.final_model, params.lambda, r.sigma_c);
        const double best = e.brute_force_minimum();
        CHECK(e.energy(testing::fg_bytes(r.mask.labels)) == best);
        CHECK(r.mask.energy == doctest::Approx(best).epsilon(1e-12));
        check_seeds_preserved(seeds, r.mask);
    }
}

TEST_CASE("fully seeded image returns the seeds") {
    Rng rng(6);
    const ChromaImage img = color::transform_image(testing::random_image(5, 5, rng));
    SeedMask seeds(5, 5);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) seeds(x, y) = x < 2 ? SeedLabel::Foreground : SeedLabel::Background;
    }
    const SegmentResult r = segment_iterated(img, seeds);
    check_seeds_preserved(seeds, r.mask);
    double boundary = 0.0;
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= 5 || ny >= 5 || !(x < 2 && nx >= 2)) continue;
                    const auto a = img.at(x, y), b = img.at(nx, ny);
                    const double d2 = (a.x1 - b.x1) * (a.x1 - b.x1) + (a.x2 - b.x2) * (a.x2 - b.x2) +
                                      (a.x3 - b.x3) * (a.x3 - b.x3);
                    boundary += std::exp(-d2 / (2 * r.sigma_c * r.sigma_c)) / (dy != 0 ? std::sqrt(2.0) : 1.0);
                }
            }
        }
    }
    CHECK(r.mask.energy == doctest::Approx(boundary).epsilon(1e-12));
}

TEST_CASE("two-tone synthetic is recovered") {
    const synth::SynthItem demo = synth::two_tone_demo(64);
    const ChromaImage img = color::transform_image(demo.image);
    const SegmentResult r = segment_iterated(img, demo.seeds);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < demo.truth.labels.size(); ++i) {
        agree += demo.truth.labels.values()[i] == r.mask.labels.values()[i];
    }
    CHECK(static_cast<double>(agree) / demo.truth.labels.size() >= 0.99);
    check_seeds_preserved(demo.seeds, r.mask);
}

TEST_CASE("blob seeds segment close to the truth") {
    synth::BlobSpec spec;
    for (int c = 0; c < spec.classes; ++c) {
        const synth::SynthItem item = synth::make_blob(spec, c, 0);
        const SegmentResult r = segment_iterated(color::transform_image(item.image), item.seeds);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < item.truth.labels.size(); ++i) {
            agree += item.truth.labels.values()[i] == r.mask.labels.values()[i];
        }
        CHECK(static_cast<double>(agree) / item.truth.labels.size() >= 0.9);
        check_seeds_preserved(item.seeds, r.mask);
    }
}

TEST_CASE("band grows monotonically and results are deterministic") {
    Rng rng(12);
    const ChromaImage img = color::transform_image(testing::random_image(20, 14, rng));
    SeedMask seeds(20, 14);
    seeds(3, 3) = SeedLabel::Foreground;
    seeds(16, 10) = SeedLabel::Background;
    SegmentParams p;
    p.max_rounds = 6;
    const SegmentResult a = segment_iterated(img, seeds, p);
    const SegmentResult b = segment_iterated(img, seeds, p);
    CHECK(a.mask.labels == b.mask.labels);
    CHECK(a.mask.energy == b.mask.energy);
    CHECK(a.rounds <= 6);
    CHECK(std::is_sorted(a.labeled_per_round.begin(), a.labeled_per_round.end()));
    check_seeds_preserved(seeds, a.mask);
}

TEST_CASE("default contrast scale") {
    CHECK(default_sigma_c(color::transform_image(RgbImage(4, 4, Rgb{0.2, 0.2, 0.2}))) == 1.0);
    RgbImage two(2, 1);
    two(0, 0) = {0, 0, 0};
    two(1, 0) = {0.3, 0.3, 0.3};
    CHECK(default_sigma_c(color::transform_image(two)) == doctest::Approx(0.3));
}
