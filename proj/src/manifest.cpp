#include "blockctm/manifest.hpp"

#include <algorithm>
#include <map>

#include "blockctm/error.hpp"
#include "blockctm/image_io.hpp"
#include "blockctm/text.hpp"

namespace blockctm::eval {

namespace fs = std::filesystem;

std::vector<int> DatasetManifest::labels() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const Entry& e : entries) out.push_back(e.class_index);
    return out;
}

DatasetManifest parse_manifest(const std::string& body, const fs::path& base_dir,
                               const ManifestOptions& options) {
    const std::vector<std::string> lines = text::split_lines(body);
    std::size_t ln = 0;
    while (ln < lines.size() && text::trim(lines[ln]).empty()) ++ln;
    if (ln == lines.size()) throw FormatError("manifest: missing header line");

    std::vector<std::string> header = text::split(lines[ln], ',');
    for (std::string& h : header) h = text::trim(h);
    int col_image = -1, col_class = -1, col_seeds = -1, col_mask = -1;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const std::string& h = header[c];
        int* slot = h == "image" ? &col_image : h == "class" ? &col_class
                  : h == "seeds" ? &col_seeds : h == "mask" ? &col_mask : nullptr;
        if (slot == nullptr) throw FormatError("manifest: unknown column '" + h + "'");
        if (*slot != -1) throw FormatError("manifest: duplicate column '" + h + "'");
        *slot = c;
    }
    if (col_image < 0 || col_class < 0) throw FormatError("manifest: header must name 'image' and 'class'");

    DatasetManifest m;
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    std::vector<std::string> missing;
    for (++ln; ln < lines.size(); ++ln) {
        if (text::trim(lines[ln]).empty()) continue;
        std::vector<std::string> cols = text::split(lines[ln], ',');
        for (std::string& c : cols) c = text::trim(c);
        const std::string where = "manifest line " + std::to_string(ln + 1);
        if (cols.size() != header.size()) {
            throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(cols.size()));
        }
        DatasetManifest::Entry e;
        e.id = cols[col_image];
        e.class_name = cols[col_class];
        if (e.id.empty()) throw FormatError(where + ": empty image path");
        if (e.class_name.empty()) throw FormatError(where + ": empty class name");
        e.image = resolve(e.id);
        if (col_seeds >= 0 && !cols[col_seeds].empty()) e.seeds = resolve(cols[col_seeds]);
        if (col_mask >= 0 && !cols[col_mask].empty()) e.mask = resolve(cols[col_mask]);
        if (options.check_paths) {
            for (const fs::path* p : {&e.image, e.seeds ? &*e.seeds : nullptr, e.mask ? &*e.mask : nullptr}) {
                if (p != nullptr && !fs::exists(*p)) missing.push_back(p->string());
            }
        }
        m.entries.push_back(std::move(e));
    }
    if (!missing.empty()) {
        std::string msg = "manifest: missing files:";
        for (const std::string& p : missing) msg += " " + p;
        throw IoError(msg);
    }
    if (m.entries.empty()) throw FormatError("manifest: no entries");

    std::map<std::string, std::size_t> counts;
    for (const auto& e : m.entries) ++counts[e.class_name];
    for (const auto& [name, count] : counts) {
        if (count < options.min_per_class) {
            throw PreconditionError("class '" + name + "' has " + std::to_string(count) +
                                    " image(s); at least " + std::to_string(options.min_per_class) +
                                    " are required");
        }
        m.class_names.push_back(name);
    }
    for (auto& e : m.entries) {
        e.class_index = static_cast<int>(
            std::lower_bound(m.class_names.begin(), m.class_names.end(), e.class_name) - m.class_names.begin());
    }
    return m;
}

DatasetManifest load_manifest(const fs::path& path, const ManifestOptions& options) {
    const io::Bytes bytes = io::read_file(path);
    return parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path(), options);
}

std::string format_manifest(const DatasetManifest& m, const fs::path& base_dir) {
    auto rel = [&](const fs::path& p) { return p.lexically_relative(base_dir).generic_string(); };
    std::string out = "image,class,seeds,mask\n";
    for (const auto& e : m.entries) {
        out += rel(e.image) + "," + e.class_name + "," + (e.seeds ? rel(*e.seeds) : "") + "," +
               (e.mask ? rel(*e.mask) : "") + "\n";
    }
    return out;
}

}  // namespace blockctm::eval
