#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "blockctm/color.hpp"
#include "blockctm/image.hpp"
#include "blockctm/model.hpp"
#include "blockctm/segmentation.hpp"

namespace blockctm::service {

/// `length` pixels starting at (col, row), all set to `label`.
struct SeedRun {
    SeedLabel label = SeedLabel::Unknown;
    int row = 0;
    int col = 0;
    int length = 0;
};

/// Paints runs onto `seeds`; later runs win. Throws PreconditionError when
/// a run leaves the image.
void apply_runs(SeedMask& seeds, const std::vector<SeedRun>& runs);

/// Foreground runs of a mask in row-major order, as (row, col, length).
[[nodiscard]] std::vector<std::array<int, 3>> foreground_runs(const SegMask& mask);

struct Session {
    std::string id;
    RgbImage image;
    color::ChromaImage chroma;
    SeedMask seeds;
    graphcut::SegmentParams params;
    std::uint64_t revision = 0;
    std::optional<SegMask> mask;
    std::uint64_t mask_revision = 0;
    int rounds = 0;
    /// Serializes every read and write of the fields above.
    std::mutex mutex;
};

/// In-memory sessions, at most `capacity`; the least recently used one is
/// evicted on overflow.
class SessionStore {
public:
    explicit SessionStore(std::size_t capacity);

    std::shared_ptr<Session> create(RgbImage image);
    /// Null for unknown ids. Marks the session as used.
    [[nodiscard]] std::shared_ptr<Session> find(const std::string& id);
    bool erase(const std::string& id);
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }

private:
    std::string fresh_id();

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<std::string> order_;  // front = most recent
    std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_;
};

/// Immutable trained models loaded on demand from `<dir>/<name>.ctmm`.
class ModelRegistry {
public:
    explicit ModelRegistry(std::filesystem::path dir);
    /// Throws PreconditionError for names outside [A-Za-z0-9_.-] or
    /// starting with '.', IoError when the file is absent.
    [[nodiscard]] std::shared_ptr<const classify::TrainedModel> get(const std::string& name);
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const classify::TrainedModel>> cache_;
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

/// Routes the session API. Independent of any network library.
///   POST   /sessions                 body = PNG or PPM bytes
///   GET    /sessions/{id}
///   PUT    /sessions/{id}/seeds      {"mode": "replace"|"merge", "runs": [...]}
///   PUT    /sessions/{id}/params     {"lambda", "sigma_c", "bins", "max_rounds"}
///   POST   /sessions/{id}/segment    optional {"revision": n}
///   GET    /sessions/{id}/mask.png
///   GET    /sessions/{id}/mask       run-length JSON
///   POST   /sessions/{id}/classify   {"model": name}
///   DELETE /sessions/{id}
///   GET    /health
class ApiHandler {
public:
    ApiHandler(std::size_t session_capacity, std::filesystem::path model_dir);

    [[nodiscard]] ApiResponse handle(const ApiRequest& request);
    [[nodiscard]] SessionStore& sessions() noexcept { return sessions_; }

private:
    ApiResponse create_session(const ApiRequest& request);
    ApiResponse session_info(Session& s);
    ApiResponse put_seeds(Session& s, const std::string& body);
    ApiResponse put_params(Session& s, const std::string& body);
    ApiResponse segment(Session& s, const std::string& body);
    ApiResponse mask_png(Session& s);
    ApiResponse mask_runs(Session& s);
    ApiResponse classify(Session& s, const std::string& body);

    SessionStore sessions_;
    ModelRegistry models_;
};

}  // namespace blockctm::service
