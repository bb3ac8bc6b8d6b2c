#include "blockctm/feature_io.hpp"

#include <cstdio>
#include <sstream>

#include "blockctm/bytes.hpp"
#include "blockctm/text.hpp"

namespace blockctm::ctm {

namespace {

int common_grid_side(std::span<const FeatureRecord> records) {
    if (records.empty()) return 1;
    const int g = records.front().features.grid_side;
    const BlockScheme scheme(g);
    for (const FeatureRecord& r : records) {
        if (r.features.grid_side != g) throw PreconditionError("feature records mix block schemes");
        if (r.features.values.size() != scheme.feature_length()) {
            throw DimensionError("feature record '" + r.image_id + "' has " +
                                 std::to_string(r.features.values.size()) + " values, expected " +
                                 std::to_string(scheme.feature_length()));
        }
    }
    return g;
}

void check_field(const std::string& s, const char* what) {
    if (s.find_first_of("\t\n\r") != std::string::npos) {
        throw PreconditionError(std::string(what) + " '" + s + "' contains a tab or newline");
    }
}

}  // namespace

std::string write_feature_table(std::span<const FeatureRecord> records) {
    const int g = common_grid_side(records);
    const std::size_t dim = BlockScheme(g).feature_length();
    std::string out = "id\tlabel\tg";
    for (std::size_t i = 0; i < dim; ++i) out += "\tf" + std::to_string(i);
    out += '\n';
    for (const FeatureRecord& r : records) {
        check_field(r.image_id, "image id");
        check_field(r.label, "label");
        out += r.image_id + '\t' + r.label + '\t' + std::to_string(g);
        for (double v : r.features.values) {
            out += '\t';
            out += text::format_exact(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<FeatureRecord> read_feature_table(const std::string& body) {
    const std::vector<std::string> lines = text::split_lines(body);
    if (lines.empty()) throw FormatError("feature table: missing header");
    const auto header = text::split(lines.front(), '\t');
    if (header.size() < 3 || header[0] != "id" || header[1] != "label" || header[2] != "g") {
        throw FormatError("feature table: bad header");
    }
    std::vector<FeatureRecord> records;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cols = text::split(lines[ln], '\t');
        const std::string where = "feature table line " + std::to_string(ln + 1);
        if (cols.size() < 3) throw FormatError(where + ": too few columns");
        FeatureRecord r;
        r.image_id = cols[0];
        r.label = cols[1];
        r.features.grid_side = static_cast<int>(text::parse_int(cols[2], where));
        const BlockScheme scheme(r.features.grid_side);
        if (cols.size() != 3 + scheme.feature_length()) {
            throw FormatError(where + ": expected " + std::to_string(scheme.feature_length()) +
                              " values, found " + std::to_string(cols.size() - 3));
        }
        for (std::size_t i = 3; i < cols.size(); ++i) {
            r.features.values.push_back(text::parse_double(cols[i], where));
        }
        // Emptiness is not stored in the text form; recover it from the
        // all-zero convention.
        for (int b = 0; b < scheme.block_count(); ++b) {
            bool zero = true;
            for (int k = 0; k < kValuesPerBlock; ++k) {
                zero = zero && r.features.values[static_cast<std::size_t>(b) * kValuesPerBlock + k] == 0.0;
            }
            r.features.empty_blocks.push_back(zero ? 1 : 0);
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<std::uint8_t> write_feature_binary(std::span<const FeatureRecord> records) {
    const int g = common_grid_side(records);
    const BlockScheme scheme(g);
    ByteWriter w;
    w.put_bytes("CTMF");
    w.put_u8(kFeatureFormatVersion);
    w.put_u32(static_cast<std::uint32_t>(g));
    w.put_u32(static_cast<std::uint32_t>(scheme.feature_length()));
    w.put_u32(static_cast<std::uint32_t>(records.size()));
    for (const FeatureRecord& r : records) {
        w.put_string(r.image_id);
        w.put_string(r.label);
        for (int b = 0; b < scheme.block_count(); ++b) {
            const bool empty = static_cast<std::size_t>(b) < r.features.empty_blocks.size() &&
                               r.features.empty_blocks[b] != 0;
            w.put_u8(empty ? 1 : 0);
        }
        for (double v : r.features.values) w.put_f64(v);
    }
    return w.take();
}

std::vector<FeatureRecord> read_feature_binary(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "feature file");
    if (r.raw(4) != "CTMF") throw FormatError("feature file: bad magic (expected CTMF)");
    const std::uint8_t version = r.u8();
    if (version != kFeatureFormatVersion) {
        throw FormatError("feature file: unsupported version " + std::to_string(version));
    }
    const int g = static_cast<int>(r.u32());
    const BlockScheme scheme(g);
    const std::uint32_t dim = r.u32();
    if (dim != scheme.feature_length()) throw FormatError("feature file: dimension does not match scheme");
    const std::uint32_t count = r.u32();
    std::vector<FeatureRecord> records;
    for (std::uint32_t i = 0; i < count; ++i) {
        FeatureRecord rec;
        rec.image_id = r.string();
        rec.label = r.string();
        rec.features.grid_side = g;
        for (int b = 0; b < scheme.block_count(); ++b) rec.features.empty_blocks.push_back(r.u8());
        r.need(static_cast<std::size_t>(dim) * 8);
        rec.features.values.resize(dim);
        for (double& v : rec.features.values) v = r.f64();
        records.push_back(std::move(rec));
    }
    if (!r.at_end()) throw FormatError("feature file: trailing bytes");
    return records;
}

}  // namespace blockctm::ctm
