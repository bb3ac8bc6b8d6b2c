#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace blockctm::app {

/// Parsed command-line / server configuration of one invocation.
struct JobConfig {
    std::string command;

    std::optional<std::filesystem::path> image;
    std::optional<std::filesystem::path> seeds;
    std::optional<std::filesystem::path> mask;
    std::optional<std::filesystem::path> manifest;
    std::optional<std::filesystem::path> model;
    std::optional<std::filesystem::path> out;

    std::vector<int> schemes{1};  // block counts B
    std::vector<double> fractions{0.70, 0.50, 0.30};
    int runs = 5;
    std::uint64_t seed = 42;
    std::string classifier = "both";
    double sigma = 0.5;
    bool sigma_grid = false;
    int k = 1;
    std::string fusion = "knn-priority";
    std::string format = "table";

    double lambda = 1.0;
    std::optional<double> sigma_c;
    int bins = 16;
    int max_rounds = 10;

    int classes = 5;
    int per_class = 40;
    int size = 48;
    bool demo = false;

    std::string host = "127.0.0.1";
    int port = 8080;
    int session_capacity = 64;
    std::filesystem::path model_dir = "models";
    std::optional<std::filesystem::path> static_dir;

    /// Every problem found, in field order; empty when the config is usable.
    [[nodiscard]] std::vector<std::string> problems() const;
    /// Throws ConfigError listing all problems at once.
    void validate() const;
};

/// Grid side g for a block count B in {1, 4, 16, 64}.
[[nodiscard]] int grid_side_for_blocks(int blocks);

}  // namespace blockctm::app
