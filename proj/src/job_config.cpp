#include "blockctm/job_config.hpp"


#include "blockctm/error.hpp"

namespace blockctm::app {

namespace fs = std::filesystem;

int grid_side_for_blocks(int blocks) {
    switch (blocks) {
        case 1: return 1;
        case 4: return 2;
        case 16: return 4;
        case 64: return 8;
        default: throw ConfigError("block count must be 1, 4, 16 or 64, got " + std::to_string(blocks));
    }
}

std::vector<std::string> JobConfig::problems() const {
    std::vector<std::string> p;
    const auto require = [&](const std::optional<fs::path>& v, const char* flag) {
        if (!v) p.push_back(std::string(flag) + " is required for '" + command + "'");
    };
    const auto readable = [&](const std::optional<fs::path>& v, const char* flag) {
        if (v && !fs::is_regular_file(*v)) p.push_back(std::string(flag) + ": no such file '" + v->string() + "'");
    };
    const auto writable_parent = [&](const std::optional<fs::path>& v, const char* flag) {
        if (!v) return;
        const fs::path parent = v->parent_path();
        if (!parent.empty() && !fs::is_directory(parent)) {
            p.push_back(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
        }
    };

    readable(image, "--image");
    readable(seeds, "--seeds");
    readable(mask, "--mask");
    readable(manifest, "--manifest");

    if (command == "segment") {
        require(image, "--image");
        require(seeds, "--seeds");
        require(out, "--out");
        writable_parent(out, "--out");
    } else if (command == "extract") {
        if (!image && !manifest) p.push_back("--image or --manifest is required for 'extract'");
        if (image && manifest) p.push_back("--image and --manifest are mutually exclusive");
        writable_parent(out, "--out");
    } else if (command == "train") {
        require(manifest, "--manifest");
        require(out, "--out");
        writable_parent(out, "--out");
    } else if (command == "classify") {
        require(model, "--model");
        require(image, "--image");
        readable(model, "--model");
    } else if (command == "evaluate") {
        require(manifest, "--manifest");
        writable_parent(out, "--out");
    } else if (command == "synth") {
        require(out, "--out");
    }

    if (schemes.empty()) p.emplace_back("--scheme: at least one block count is required");
    for (int b : schemes) {
        if (b != 1 && b != 4 && b != 16 && b != 64) {
            p.push_back("--scheme: block count must be 1, 4, 16 or 64, got " + std::to_string(b));
        }
    }
    if ((command == "extract" || command == "train") && schemes.size() > 1) {
        p.emplace_back("--scheme: '" + command + "' takes a single block count");
    }
    if (fractions.empty()) p.emplace_back("--fractions: at least one fraction is required");
    for (double f : fractions) {
        if (!(f > 0.0 && f < 1.0)) p.push_back("--fractions: " + std::to_string(f) + " is outside (0, 1)");
    }
    if (runs < 1) p.emplace_back("--runs: must be at least 1");
    if (classifier != "knn" && classifier != "pnn" && classifier != "both") {
        p.push_back("--classifier: expected knn, pnn or both, got '" + classifier + "'");
    }
    if (!(sigma > 0.0)) p.emplace_back("--sigma: must be positive");
    if (k < 1) p.emplace_back("--k: must be at least 1");
    if (fusion != "knn-priority" && fusion != "majority-with-knn-tiebreak") {
        p.push_back("--fusion: expected knn-priority or majority-with-knn-tiebreak, got '" + fusion + "'");
    }
    if (format != "table" && format != "csv") p.push_back("--format: expected table or csv, got '" + format + "'");
    if (!(lambda >= 0.0)) p.emplace_back("--lambda: must be nonnegative");
    if (sigma_c && !(*sigma_c > 0.0)) p.emplace_back("--sigma-c: must be positive");
    if (bins < 1 || bins > 64) p.emplace_back("--bins: must lie in [1, 64]");
    if (max_rounds < 0) p.emplace_back("--max-rounds: must be nonnegative");
    if (classes < 1) p.emplace_back("--classes: must be at least 1");
    if (per_class < 2) p.emplace_back("--per-class: must be at least 2");
    if (size < 16) p.emplace_back("--size: must be at least 16");
    if (port < 0 || port > 65535) p.emplace_back("--port: must lie in [0, 65535]");
    if (session_capacity < 1) p.emplace_back("--capacity: must be at least 1");
    if (command == "serve" && static_dir && !fs::is_directory(*static_dir)) {
        p.push_back("--static: no such directory '" + static_dir->string() + "'");
    }
    return p;
}

void JobConfig::validate() const {
    const std::vector<std::string> p = problems();
    if (p.empty()) return;
    std::string msg = p.front();
    for (std::size_t i = 1; i < p.size(); ++i) msg += "; " + p[i];
    throw ConfigError(msg);
}

}  // namespace blockctm::app
