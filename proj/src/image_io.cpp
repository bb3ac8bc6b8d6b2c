#include "blockctm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace blockctm::io {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin());
}

struct MemoryReader {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

struct PngContext {
    char message[256] = "unknown libpng error";
};

void png_read_callback(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->offset + count > reader->bytes.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, reader->bytes.data() + reader->offset, count);
    reader->offset += count;
}

void png_error_callback(png_structp png, png_const_charp msg) {
    auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
    std::snprintf(ctx->message, sizeof ctx->message, "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

Raster8 decode_png(std::span<const std::uint8_t> bytes) {
    // Allocated before setjmp so nothing below it has its lifetime skipped.
    auto out = std::make_unique<Raster8>();
    auto rows = std::make_unique<std::vector<png_bytep>>();
    PngContext ctx;
    MemoryReader reader{bytes, 0};

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_callback,
                                             png_warning_callback);
    if (png == nullptr) throw FormatError("png: cannot allocate decoder");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("png: cannot allocate decoder");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(std::string("png: ") + ctx.message);
    }
    png_set_read_fn(png, &reader, png_read_callback);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) png_error(png, "unsupported channel layout");
    const std::size_t stride = png_get_rowbytes(png, info);
    if (stride != static_cast<std::size_t>(width) * static_cast<std::size_t>(channels)) {
        png_error(png, "unexpected row stride");
    }

    out->width = static_cast<int>(width);
    out->height = static_cast<int>(height);
    out->channels = channels;
    out->samples.resize(stride * height);
    rows->resize(height);
    for (png_uint_32 y = 0; y < height; ++y) (*rows)[y] = out->samples.data() + y * stride;
    png_read_image(png, rows->data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return std::move(*out);
}

// Reads one whitespace-delimited PPM header token, skipping '#' comments.
std::string ppm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        tok.push_back(static_cast<char>(bytes[pos++]));
    }
    if (tok.empty()) throw FormatError("ppm: truncated header");
    return tok;
}

int ppm_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* what) {
    const std::string tok = ppm_token(bytes, pos);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        tok.size() > 9) {
        throw FormatError(std::string("ppm: bad ") + what + " '" + tok + "'");
    }
    return std::stoi(tok);
}

Raster8 decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 2;
    const int width = ppm_int(bytes, pos, "width");
    const int height = ppm_int(bytes, pos, "height");
    const int maxval = ppm_int(bytes, pos, "maxval");
    if (width <= 0 || height <= 0) throw FormatError("ppm: non-positive dimensions");
    if (maxval <= 0 || maxval > 65535) throw FormatError("ppm: maxval out of range");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("ppm: truncated header");
    ++pos;

    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - pos < count * bytes_per_sample) throw FormatError("ppm: truncated pixel data");

    Raster8 out{width, height, 3, std::vector<std::uint8_t>(count)};
    for (std::size_t i = 0; i < count; ++i) {
        unsigned value = bytes[pos + i * bytes_per_sample];
        if (bytes_per_sample == 2) value = (value << 8) | bytes[pos + i * 2 + 1];
        if (value > static_cast<unsigned>(maxval)) throw FormatError("ppm: sample exceeds maxval");
        out.samples[i] = maxval == 255
                             ? static_cast<std::uint8_t>(value)
                             : static_cast<std::uint8_t>(std::lround(255.0 * value / maxval));
    }
    return out;
}

void check_raster(const Raster8& r) {
    if (r.width <= 0 || r.height <= 0) throw DimensionError("raster dimensions must be positive");
    if (r.channels != 1 && r.channels != 3) throw DimensionError("raster must have 1 or 3 channels");
    if (r.samples.size() != static_cast<std::size_t>(r.width) * r.height * r.channels) {
        throw DimensionError("raster sample count does not match dimensions");
    }
}

Raster8 single_channel(const Raster8& r, const char* what) {
    if (r.channels != 1) {
        throw FormatError(std::string(what) + " must be a single-channel (grayscale) image");
    }
    return r;
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Raster8 decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
    throw FormatError("unsupported image format (expected PNG or binary PPM)");
}

Bytes encode_png(const Raster8& raster) {
    check_raster(raster);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width);
    image.height = static_cast<png_uint_32>(raster.height);
    image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.samples.data(), 0, nullptr)) {
        throw FormatError(std::string("png encode: ") + image.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.samples.data(), 0, nullptr)) {
        throw FormatError(std::string("png encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

Bytes encode_ppm(const Raster8& raster) {
    check_raster(raster);
    if (raster.channels != 3) throw FormatError("ppm encode requires 3 channels");
    const std::string header = "P6\n" + std::to_string(raster.width) + " " +
                               std::to_string(raster.height) + "\n255\n";
    Bytes out(header.begin(), header.end());
    out.insert(out.end(), raster.samples.begin(), raster.samples.end());
    return out;
}

RgbImage to_rgb(const Raster8& r) {
    check_raster(r);
    RgbImage img(r.width, r.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (r.channels == 1) {
            const double v = r.samples[i] / 255.0;
            img[i] = {v, v, v};
        } else {
            img[i] = {r.samples[3 * i] / 255.0, r.samples[3 * i + 1] / 255.0,
                      r.samples[3 * i + 2] / 255.0};
        }
    }
    return img;
}

Raster8 from_rgb(const RgbImage& img) {
    Raster8 r{img.width(), img.height(), 3, std::vector<std::uint8_t>(img.size() * 3)};
    auto quantize = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (std::size_t i = 0; i < img.size(); ++i) {
        r.samples[3 * i] = quantize(img[i].r);
        r.samples[3 * i + 1] = quantize(img[i].g);
        r.samples[3 * i + 2] = quantize(img[i].b);
    }
    return r;
}

RgbImage read_rgb_image(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    try {
        return to_rgb(decode_image(bytes));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
    write_file(path, encode_png(from_rgb(img)));
}

SeedMask decode_seed_mask(std::span<const std::uint8_t> bytes) {
    if (!is_png(bytes)) throw FormatError("seed mask must be a PNG file");
    const Raster8 r = single_channel(decode_png(bytes), "seed mask");
    SeedMask seeds(r.width, r.height);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const std::uint8_t v = r.samples[i];
        if (v > 2) {
            throw FormatError("seed mask value " + std::to_string(v) + " at pixel (" +
                              std::to_string(i % r.width) + ", " + std::to_string(i / r.width) +
                              ") is not 0, 1 or 2");
        }
        seeds[i] = static_cast<SeedLabel>(v);
    }
    return seeds;
}

SeedMask read_seed_mask(const std::filesystem::path& path) {
    try {
        return decode_seed_mask(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

Bytes encode_seed_mask(const SeedMask& seeds) {
    Raster8 r{seeds.width(), seeds.height(), 1, std::vector<std::uint8_t>(seeds.size())};
    for (std::size_t i = 0; i < seeds.size(); ++i) r.samples[i] = static_cast<std::uint8_t>(seeds[i]);
    return encode_png(r);
}

Bytes encode_seg_mask(const SegMask& mask) {
    Raster8 r{mask.width(), mask.height(), 1, std::vector<std::uint8_t>(mask.labels.size())};
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        r.samples[i] = mask.labels[i] == Label::Foreground ? 255 : 0;
    }
    return encode_png(r);
}

SegMask decode_seg_mask(std::span<const std::uint8_t> bytes) {
    if (!is_png(bytes)) throw FormatError("segmentation mask must be a PNG file");
    const Raster8 r = single_channel(decode_png(bytes), "segmentation mask");
    SegMask mask{Grid<Label>(r.width, r.height), 0.0};
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        mask.labels[i] = r.samples[i] != 0 ? Label::Foreground : Label::Background;
    }
    return mask;
}

SegMask read_seg_mask(const std::filesystem::path& path) {
    try {
        return decode_seg_mask(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_chroma_debug(const color::ChromaImage& img, const std::filesystem::path& prefix) {
    struct PlaneSpec {
        const Plane* plane;
        const char* suffix;
        double offset;
        double scale;
    };
    // x1, x2 lie in [-1,1]; x3 in [0,1].
    const PlaneSpec specs[] = {{&img.x1, "_x1.pgm", -1.0, 127.5},
                               {&img.x2, "_x2.pgm", -1.0, 127.5},
                               {&img.x3, "_x3.pgm", 0.0, 255.0}};
    for (const PlaneSpec& s : specs) {
        std::ostringstream header;
        header.precision(17);
        header << "P5\n# blockctm scale=" << s.scale << " offset=" << s.offset << "\n"
               << s.plane->width() << " " << s.plane->height() << "\n255\n";
        const std::string h = header.str();
        Bytes out(h.begin(), h.end());
        for (double v : s.plane->values()) {
            out.push_back(static_cast<std::uint8_t>(std::clamp<long>(std::lround((v - s.offset) * s.scale), 0, 255)));
        }
        std::filesystem::path path = prefix;
        path += s.suffix;
        write_file(path, out);
    }
}

}  // namespace blockctm::io
