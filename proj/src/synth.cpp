#include "blockctm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "blockctm/error.hpp"
#include "blockctm/image_io.hpp"
#include "blockctm/rng.hpp"

namespace blockctm::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Rgb hsv_color(double hue_deg, double s, double v) {
    const double h = std::fmod(std::fmod(hue_deg, 360.0) + 360.0, 360.0) / 60.0;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (sector) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace

std::string class_name(int class_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class_%02d", class_index);
    return buf;
}

SynthItem make_blob(const BlobSpec& spec, int class_index, int item_index) {
    if (spec.classes < 1 || spec.per_class < 1) throw ConfigError("synthetic data set needs classes and items");
    if (spec.width < 16 || spec.height < 16) throw ConfigError("synthetic images must be at least 16x16");
    if (class_index < 0 || class_index >= spec.classes) throw PreconditionError("class index out of range");

    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(class_index) * 1000003ULL +
                                       static_cast<std::uint64_t>(item_index)));
    const int w = spec.width;
    const int h = spec.height;
    const double hue = 160.0 + 320.0 * class_index / spec.classes + rng.uniform(-6.0, 6.0);
    const Rgb base = hsv_color(hue, 0.75, 0.85);
    const double period = 3.0 + 2.0 * (class_index % 4);
    const double stripe_angle = std::numbers::pi * (class_index % 3) / 3.0 + rng.uniform(-0.1, 0.1);
    const double amplitude = 0.25;

    const double cx = rng.uniform(0.4, 0.6) * w;
    const double cy = rng.uniform(0.4, 0.6) * h;
    const double rx = rng.uniform(0.24, 0.32) * w;
    const double ry = rng.uniform(0.24, 0.32) * h;
    const double rot = rng.uniform(0.0, std::numbers::pi);
    const double cr = std::cos(rot);
    const double sr = std::sin(rot);
    const double phase = rng.uniform(0.0, kTwoPi);

    SynthItem item{RgbImage(w, h), SeedMask(w, h, SeedLabel::Unknown), SegMask::full(w, h), class_index};
    const Rgb ground{0.22, 0.5, 0.2};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double u = (dx * cr + dy * sr) / rx;
            const double v = (-dx * sr + dy * cr) / ry;
            const bool inside = u * u + v * v <= 1.0;
            Rgb c = ground;
            if (inside) {
                const double t = x * std::cos(stripe_angle) + y * std::sin(stripe_angle);
                const double m = 1.0 + amplitude * std::sin(kTwoPi * t / period + phase);
                c = {base.r * m, base.g * m, base.b * m};
            }
            const double sigma = inside ? spec.noise : 2.0 * spec.noise;
            item.image(x, y) = {quantize(c.r + sigma * rng.normal()), quantize(c.g + sigma * rng.normal()),
                                quantize(c.b + sigma * rng.normal())};
            item.truth.labels(x, y) = inside ? Label::Foreground : Label::Background;
        }
    }
    const int seed_radius = 3;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool frame = x < 2 || y < 2 || x >= w - 2 || y >= h - 2;
            const double dx = x - cx;
            const double dy = y - cy;
            if (frame) {
                item.seeds(x, y) = SeedLabel::Background;
            } else if (dx * dx + dy * dy <= seed_radius * seed_radius) {
                item.seeds(x, y) = SeedLabel::Foreground;
            }
        }
    }
    return item;
}

fs::path write_blob_dataset(const fs::path& dir, const BlobSpec& spec) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    std::string manifest = "image,class,seeds,mask\n";
    for (int c = 0; c < spec.classes; ++c) {
        const std::string name = class_name(c);
        fs::create_directories(dir / name, ec);
        if (ec) throw IoError("cannot create directory '" + (dir / name).string() + "': " + ec.message());
        for (int i = 0; i < spec.per_class; ++i) {
            char stem[32];
            std::snprintf(stem, sizeof stem, "%03d", i);
            const SynthItem item = make_blob(spec, c, i);
            const std::string base = name + "/" + stem;
            io::write_rgb_png(dir / (base + ".png"), item.image);
            io::write_file(dir / (base + "_seeds.png"), io::encode_seed_mask(item.seeds));
            io::write_file(dir / (base + "_mask.png"), io::encode_seg_mask(item.truth));
            manifest += base + ".png," + name + "," + base + "_seeds.png," + base + "_mask.png\n";
        }
    }
    const fs::path path = dir / "manifest.csv";
    io::write_text_file(path, manifest);
    return path;
}

SynthItem two_tone_demo(int size) {
    if (size < 8) throw ConfigError("two-tone demo needs a side of at least 8");
    const Rgb a{0.8, 0.3, 0.2};
    const Rgb b{0.2, 0.4, 0.8};
    SynthItem item{RgbImage(size, size), SeedMask(size, size, SeedLabel::Unknown), SegMask::full(size, size), 0};
    const int half = size / 2;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const bool left = x < half;
            const Rgb& c = left ? a : b;
            item.image(x, y) = {quantize(c.r), quantize(c.g), quantize(c.b)};
            item.truth.labels(x, y) = left ? Label::Foreground : Label::Background;
        }
    }
    for (int y = size / 4; y < size - size / 4; ++y) {
        item.seeds(size / 4, y) = SeedLabel::Foreground;
        item.seeds(size - 1 - size / 4, y) = SeedLabel::Background;
    }
    return item;
}

}  // namespace blockctm::synth
