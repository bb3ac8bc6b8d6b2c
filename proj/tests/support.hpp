#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "blockctm/color.hpp"
#include "blockctm/image.hpp"
#include "blockctm/maxflow.hpp"
#include "blockctm/rng.hpp"
#include "blockctm/segmentation.hpp"
#include "oracles/oracles.hpp"

namespace testing {

inline blockctm::RgbImage random_image(int w, int h, blockctm::Rng& rng) {
    blockctm::RgbImage img(w, h);
    for (auto& p : img.values()) p = {rng.uniform(), rng.uniform(), rng.uniform()};
    return img;
}

/// Random mask with at least one foreground pixel.
inline blockctm::SegMask random_mask(int w, int h, double p_fg, blockctm::Rng& rng) {
    blockctm::SegMask m{blockctm::Grid<blockctm::Label>(w, h, blockctm::Label::Background), 0.0};
    for (auto& l : m.labels.values()) l = rng.uniform() < p_fg ? blockctm::Label::Foreground : blockctm::Label::Background;
    m.labels(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))) = blockctm::Label::Foreground;
    return m;
}

inline std::vector<std::uint8_t> fg_bytes(const blockctm::Grid<blockctm::Label>& labels) {
    std::vector<std::uint8_t> out;
    for (auto l : labels.values()) out.push_back(l == blockctm::Label::Foreground);
    return out;
}

inline std::vector<std::uint8_t> fg_bytes(const blockctm::SegMask& m) { return fg_bytes(m.labels); }

/// Oracle energy over the library's final appearance model.
inline oracle::EnergyModel oracle_energy(const blockctm::color::ChromaImage& img, const blockctm::SeedMask& seeds,
                                         const blockctm::graphcut::AppearanceModel& model, double lambda,
                                         double sigma) {
    oracle::EnergyModel e;
    e.w = img.width();
    e.h = img.height();
    for (int y = 0; y < e.h; ++y) {
        for (int x = 0; x < e.w; ++x) {
            const auto c = img.at(x, y);
            e.color.push_back({c.x1, c.x2, c.x3});
            e.seed.push_back(static_cast<std::uint8_t>(seeds(x, y)));
        }
    }
    e.fg_hist = model.fg_hist;
    e.bg_hist = model.bg_hist;
    e.bins = model.bins;
    e.lambda = lambda;
    e.sigma = sigma;
    return e;
}

// A 3x3 pixel lattice: terminal links plus symmetric 8-neighbor arcs, all
// with small integer capacities so every sum is exact.
struct LatticeCase {
    blockctm::graphcut::FlowGraph graph{9};
    std::vector<oracle::Arc> arcs;  // node 0 source, 1..9 pixels, 10 sink
};

inline LatticeCase random_lattice(blockctm::Rng& rng) {
    LatticeCase c;
    for (int p = 0; p < 9; ++p) {
        const double s = static_cast<double>(rng.below(10));
        const double t = static_cast<double>(rng.below(10));
        c.graph.add_terminal(p, s, t);
        c.arcs.push_back({0, p + 1, s});
        c.arcs.push_back({p + 1, 10, t});
    }
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 1}, {0, 1}, {1, 1}}) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx > 2 || ny > 2) continue;
                const int p = y * 3 + x, q = ny * 3 + nx;
                const double cap = static_cast<double>(rng.below(6));
                c.graph.add_edge(p, q, cap, cap);
                c.arcs.push_back({p + 1, q + 1, cap});
                c.arcs.push_back({q + 1, p + 1, cap});
            }
        }
    }
    return c;
}

/// Chroma planes computed by the oracle color path.
inline std::array<oracle::Raster, 3> oracle_planes(const blockctm::RgbImage& img) {
    std::array<oracle::Raster, 3> p{oracle::Raster(img.width(), img.height()), oracle::Raster(img.width(), img.height()),
                                    oracle::Raster(img.width(), img.height())};
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto c = oracle::chroma_of(img(x, y).r, img(x, y).g, img(x, y).b);
            p[0].at(x, y) = c.x1;
            p[1].at(x, y) = c.x2;
            p[2].at(x, y) = c.x3;
        }
    }
    return p;
}

inline oracle::Raster to_raster(const blockctm::Plane& p) {
    oracle::Raster r(p.width(), p.height());
    for (int y = 0; y < p.height(); ++y) {
        for (int x = 0; x < p.width(); ++x) r.at(x, y) = p(x, y);
    }
    return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("blockctm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
