#include "blockctm/service.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

#include "json.hpp"

#include "blockctm/ctm.hpp"
#include "blockctm/error.hpp"
#include "blockctm/image_io.hpp"
#include "blockctm/rng.hpp"

namespace blockctm::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Malformed request payload; `fields` carries one diagnostic per field.
class RequestError : public Error {
public:
    RequestError(const std::string& message, std::vector<std::string> fields = {})
        : Error(message), fields_(std::move(fields)) {}
    [[nodiscard]] const char* kind() const noexcept override { return "request"; }
    [[nodiscard]] const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

ApiResponse json_response(int status, const json& body) {
    ApiResponse r;
    r.status = status;
    r.body = body.dump();
    return r;
}

ApiResponse error_response(int status, const std::string& kind, const std::string& message,
                           const std::vector<std::string>& fields = {}) {
    json body{{"error", kind}, {"message", message}};
    if (!fields.empty()) body["fields"] = fields;
    return json_response(status, body);
}

json parse_body(const std::string& body, bool allow_empty) {
    if (body.empty()) {
        if (allow_empty) return json::object();
        throw RequestError("request body is empty");
    }
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw RequestError("request body is not valid JSON");
    if (!j.is_object()) throw RequestError("request body must be a JSON object");
    return j;
}

std::optional<SeedLabel> parse_seed_label(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "fg" || s == "foreground") return SeedLabel::Foreground;
        if (s == "bg" || s == "background") return SeedLabel::Background;
        if (s == "unknown" || s == "none") return SeedLabel::Unknown;
    } else if (v.is_number_integer()) {
        const auto n = v.get<long long>();
        if (n >= 0 && n <= 2) return static_cast<SeedLabel>(n);
    }
    return std::nullopt;
}

std::vector<SeedRun> parse_runs(const json& runs, int width, int height, std::vector<std::string>& problems) {
    std::vector<SeedRun> out;
    if (!runs.is_array()) {
        problems.emplace_back("runs: must be an array");
        return out;
    }
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string at = "runs[" + std::to_string(i) + "]";
        const json& r = runs[i];
        if (!r.is_object()) {
            problems.push_back(at + ": must be an object");
            continue;
        }
        SeedRun run;
        bool ok = true;
        if (!r.contains("label")) {
            problems.push_back(at + ".label: missing");
            ok = false;
        } else if (auto l = parse_seed_label(r["label"])) {
            run.label = *l;
        } else {
            problems.push_back(at + ".label: expected fg, bg or unknown");
            ok = false;
        }
        bool integers = true;
        for (auto [key, slot] : {std::pair{"row", &run.row}, {"col", &run.col}, {"length", &run.length}}) {
            if (!r.contains(key) || !r[key].is_number_integer()) {
                problems.push_back(at + "." + key + ": expected an integer");
                integers = false;
            } else {
                *slot = r[key].get<int>();
            }
        }
        if (!integers) continue;
        if (run.length < 1) problems.push_back(at + ".length: must be positive");
        if (run.row < 0 || run.row >= height) problems.push_back(at + ".row: outside the image");
        if (run.col < 0 || run.col >= width) {
            problems.push_back(at + ".col: outside the image");
        } else if (run.length >= 1 && run.col + run.length > width) {
            problems.push_back(at + ".length: run extends past the right edge");
        }
        if (ok) out.push_back(run);
    }
    return out;
}

std::string session_path_id(const std::string& path, std::string& rest) {
    const std::string prefix = "/sessions/";
    const std::string tail = path.substr(prefix.size());
    const auto slash = tail.find('/');
    rest = slash == std::string::npos ? "" : tail.substr(slash);
    return tail.substr(0, slash);
}

}  // namespace

void apply_runs(SeedMask& seeds, const std::vector<SeedRun>& runs) {
    for (const SeedRun& r : runs) {
        if (r.length < 1 || r.row < 0 || r.row >= seeds.height() || r.col < 0 ||
            r.col + r.length > seeds.width()) {
            throw PreconditionError("seed run outside the image");
        }
        for (int x = r.col; x < r.col + r.length; ++x) seeds(x, r.row) = r.label;
    }
}

std::vector<std::array<int, 3>> foreground_runs(const SegMask& mask) {
    std::vector<std::array<int, 3>> runs;
    for (int y = 0; y < mask.height(); ++y) {
        int x = 0;
        while (x < mask.width()) {
            if (!mask.is_foreground(x, y)) {
                ++x;
                continue;
            }
            const int start = x;
            while (x < mask.width() && mask.is_foreground(x, y)) ++x;
            runs.push_back({y, start, x - start});
        }
    }
    return runs;
}

SessionStore::SessionStore(std::size_t capacity) : capacity_(capacity), salt_(std::random_device{}()) {
    if (capacity_ == 0) throw ConfigError("session capacity must be at least 1");
    salt_ = (salt_ << 32) ^ std::random_device{}();
}

std::string SessionStore::fresh_id() {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(derive_seed(salt_, ++counter_)));
    return buf;
}

std::shared_ptr<Session> SessionStore::create(RgbImage image) {
    auto s = std::make_shared<Session>();
    s->chroma = color::transform_image(image);
    s->seeds = SeedMask(image.width(), image.height(), SeedLabel::Unknown);
    s->image = std::move(image);

    std::lock_guard lock(mutex_);
    s->id = fresh_id();
    while (sessions_.size() >= capacity_) {
        sessions_.erase(order_.back());
        order_.pop_back();
    }
    order_.push_front(s->id);
    sessions_.emplace(s->id, std::pair{s, order_.begin()});
    return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second.second);
    return it->second.first;
}

bool SessionStore::erase(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    order_.erase(it->second.second);
    sessions_.erase(it);
    return true;
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

ModelRegistry::ModelRegistry(fs::path dir) : dir_(std::move(dir)) {}

std::shared_ptr<const classify::TrainedModel> ModelRegistry::get(const std::string& name) {
    const bool valid = !name.empty() && name.front() != '.' &&
                       std::all_of(name.begin(), name.end(), [](unsigned char c) {
                           return std::isalnum(c) || c == '_' || c == '-' || c == '.';
                       });
    if (!valid) throw PreconditionError("invalid model name '" + name + "'");
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    const fs::path path = dir_ / (name + ".ctmm");
    if (!fs::exists(path)) throw IoError("model '" + name + "' not found");
    auto model = std::make_shared<const classify::TrainedModel>(classify::load_model(io::read_file(path)));
    cache_.emplace(name, model);
    return model;
}

ApiHandler::ApiHandler(std::size_t session_capacity, fs::path model_dir)
    : sessions_(session_capacity), models_(std::move(model_dir)) {}

ApiResponse ApiHandler::handle(const ApiRequest& request) {
    try {
        const std::string& path = request.path;
        const std::string& method = request.method;
        if (path == "/health") {
            if (method != "GET") return error_response(405, "method", "use GET");
            return json_response(200, {{"status", "ok"}, {"sessions", sessions_.size()}});
        }
        if (path == "/sessions") {
            if (method != "POST") return error_response(405, "method", "use POST");
            return create_session(request);
        }
        if (path.rfind("/sessions/", 0) != 0) return error_response(404, "not_found", "no route for " + path);

        std::string rest;
        const std::string id = session_path_id(path, rest);
        if (method == "DELETE" && rest.empty()) {
            if (!sessions_.erase(id)) return error_response(404, "not_found", "unknown session '" + id + "'");
            ApiResponse r;
            r.status = 204;
            return r;
        }
        const std::shared_ptr<Session> session = sessions_.find(id);
        if (!session) return error_response(404, "not_found", "unknown session '" + id + "'");
        Session& s = *session;

        struct Route {
            const char* method;
            const char* rest;
        };
        auto is = [&](Route r) { return method == r.method && rest == r.rest; };
        if (is({"GET", ""})) return session_info(s);
        if (is({"PUT", "/seeds"})) return put_seeds(s, request.body);
        if (is({"PUT", "/params"})) return put_params(s, request.body);
        if (is({"POST", "/segment"})) return segment(s, request.body);
        if (is({"GET", "/mask.png"})) return mask_png(s);
        if (is({"GET", "/mask"})) return mask_runs(s);
        if (is({"POST", "/classify"})) return classify(s, request.body);
        for (const char* known : {"", "/seeds", "/params", "/segment", "/mask.png", "/mask", "/classify"}) {
            if (rest == known) return error_response(405, "method", method + " not allowed on " + path);
        }
        return error_response(404, "not_found", "no route for " + path);
    } catch (const RequestError& e) {
        return error_response(400, e.kind(), e.what(), e.fields());
    } catch (const IoError& e) {
        return error_response(404, e.kind(), e.what());
    } catch (const Error& e) {
        return error_response(400, e.kind(), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

ApiResponse ApiHandler::create_session(const ApiRequest& request) {
    if (request.body.empty()) throw RequestError("request body must hold a PNG or PPM image");
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(request.body.data()),
                                              request.body.size());
    RgbImage image = io::to_rgb(io::decode_image(bytes));
    const std::shared_ptr<Session> s = sessions_.create(std::move(image));
    std::lock_guard lock(s->mutex);
    return json_response(201, {{"id", s->id},
                               {"width", s->image.width()},
                               {"height", s->image.height()},
                               {"revision", s->revision}});
}

ApiResponse ApiHandler::session_info(Session& s) {
    std::lock_guard lock(s.mutex);
    std::size_t fg = 0;
    std::size_t bg = 0;
    for (SeedLabel l : s.seeds.values()) {
        fg += l == SeedLabel::Foreground;
        bg += l == SeedLabel::Background;
    }
    json params{{"lambda", s.params.lambda},
                {"sigma_c", s.params.sigma_c ? json(*s.params.sigma_c) : json(nullptr)},
                {"bins", s.params.bins},
                {"max_rounds", s.params.max_rounds}};
    const bool current = s.mask && s.mask_revision == s.revision;
    return json_response(200, {{"id", s.id},
                               {"width", s.image.width()},
                               {"height", s.image.height()},
                               {"revision", s.revision},
                               {"params", params},
                               {"seeds", {{"foreground", fg}, {"background", bg}}},
                               {"mask_revision", s.mask ? json(s.mask_revision) : json(nullptr)},
                               {"mask_current", current},
                               {"energy", s.mask ? json(s.mask->energy) : json(nullptr)},
                               {"rounds", s.mask ? json(s.rounds) : json(nullptr)}});
}

ApiResponse ApiHandler::put_seeds(Session& s, const std::string& body) {
    const json j = parse_body(body, false);
    std::vector<std::string> problems;
    std::string mode = "replace";
    if (j.contains("mode")) {
        if (!j["mode"].is_string() || (j["mode"] != "replace" && j["mode"] != "merge")) {
            problems.emplace_back("mode: expected replace or merge");
        } else {
            mode = j["mode"].get<std::string>();
        }
    }
    std::lock_guard lock(s.mutex);
    std::vector<SeedRun> runs;
    if (!j.contains("runs")) {
        problems.emplace_back("runs: missing");
    } else {
        runs = parse_runs(j["runs"], s.image.width(), s.image.height(), problems);
    }
    if (!problems.empty()) throw RequestError("malformed seed payload", problems);
    SeedMask next = mode == "merge" ? s.seeds : SeedMask(s.image.width(), s.image.height(), SeedLabel::Unknown);
    apply_runs(next, runs);
    s.seeds = std::move(next);
    ++s.revision;
    return json_response(200, {{"revision", s.revision}});
}

ApiResponse ApiHandler::put_params(Session& s, const std::string& body) {
    const json j = parse_body(body, false);
    std::vector<std::string> problems;
    std::lock_guard lock(s.mutex);
    graphcut::SegmentParams p = s.params;
    for (const auto& [key, value] : j.items()) {
        if (key == "lambda") {
            if (!value.is_number() || !(value.get<double>() >= 0.0)) {
                problems.emplace_back("lambda: expected a nonnegative number");
            } else {
                p.lambda = value.get<double>();
            }
        } else if (key == "sigma_c") {
            if (value.is_null()) {
                p.sigma_c.reset();
            } else if (!value.is_number() || !(value.get<double>() > 0.0)) {
                problems.emplace_back("sigma_c: expected a positive number or null");
            } else {
                p.sigma_c = value.get<double>();
            }
        } else if (key == "bins") {
            if (!value.is_number_integer() || value.get<long long>() < 1 || value.get<long long>() > 64) {
                problems.emplace_back("bins: expected an integer in [1, 64]");
            } else {
                p.bins = value.get<int>();
            }
        } else if (key == "max_rounds") {
            if (!value.is_number_integer() || value.get<long long>() < 0 || value.get<long long>() > 10000) {
                problems.emplace_back("max_rounds: expected an integer in [0, 10000]");
            } else {
                p.max_rounds = value.get<int>();
            }
        } else {
            problems.push_back(key + ": unknown parameter");
        }
    }
    if (!problems.empty()) throw RequestError("malformed parameter payload", problems);
    s.params = p;
    ++s.revision;
    return json_response(200, {{"revision", s.revision}});
}

ApiResponse ApiHandler::segment(Session& s, const std::string& body) {
    const json j = parse_body(body, true);
    SeedMask seeds;
    graphcut::SegmentParams params;
    std::uint64_t revision = 0;
    {
        std::lock_guard lock(s.mutex);
        if (j.contains("revision")) {
            if (!j["revision"].is_number_unsigned()) {
                throw RequestError("malformed segment payload", {"revision: expected a nonnegative integer"});
            }
            if (j["revision"].get<std::uint64_t>() != s.revision) {
                return error_response(409, "conflict",
                                      "session is at revision " + std::to_string(s.revision));
            }
        }
        seeds = s.seeds;
        params = s.params;
        revision = s.revision;
    }
    // Runs unlocked; the result is stored only if no mutation happened meanwhile.
    graphcut::SegmentResult result = graphcut::segment_iterated(s.chroma, seeds, params);
    std::lock_guard lock(s.mutex);
    if (s.revision != revision) {
        return error_response(409, "conflict", "seeds or parameters changed during segmentation; session is at revision " +
                                                   std::to_string(s.revision));
    }
    const std::size_t fg = result.mask.foreground_count();
    s.mask = std::move(result.mask);
    s.mask_revision = revision;
    s.rounds = result.rounds;
    return json_response(200, {{"revision", revision},
                               {"energy", s.mask->energy},
                               {"rounds", s.rounds},
                               {"foreground", fg}});
}

ApiResponse ApiHandler::mask_png(Session& s) {
    std::lock_guard lock(s.mutex);
    if (!s.mask) return error_response(404, "not_found", "session has no mask yet");
    if (s.mask_revision != s.revision) {
        return error_response(409, "conflict", "mask is stale; segment again");
    }
    const io::Bytes png = io::encode_seg_mask(*s.mask);
    ApiResponse r;
    r.content_type = "image/png";
    r.body.assign(png.begin(), png.end());
    r.headers["X-Revision"] = std::to_string(s.mask_revision);
    return r;
}

ApiResponse ApiHandler::mask_runs(Session& s) {
    std::lock_guard lock(s.mutex);
    if (!s.mask) return error_response(404, "not_found", "session has no mask yet");
    if (s.mask_revision != s.revision) {
        return error_response(409, "conflict", "mask is stale; segment again");
    }
    json runs = json::array();
    for (const auto& r : foreground_runs(*s.mask)) runs.push_back(r);
    return json_response(200, {{"width", s.mask->width()},
                               {"height", s.mask->height()},
                               {"revision", s.mask_revision},
                               {"energy", s.mask->energy},
                               {"runs", runs}});
}

ApiResponse ApiHandler::classify(Session& s, const std::string& body) {
    const json j = parse_body(body, false);
    if (!j.contains("model") || !j["model"].is_string()) {
        throw RequestError("malformed classify payload", {"model: expected a model name"});
    }
    const auto model = models_.get(j["model"].get<std::string>());
    SegMask mask;
    {
        std::lock_guard lock(s.mutex);
        if (!s.mask) return error_response(409, "conflict", "segment the session before classifying");
        if (s.mask_revision != s.revision) return error_response(409, "conflict", "mask is stale; segment again");
        mask = *s.mask;
    }
    const ctm::FeatureVector f = ctm::extract_block_features(s.chroma, mask, ctm::BlockScheme(model->grid_side));
    const classify::Prediction p = classify::predict(*model, f.values);
    json out{{"label", p.label}, {"class", model->class_names.at(static_cast<std::size_t>(p.label))}};
    if (p.knn) {
        out["knn"] = {{"label", p.knn->label}, {"nearest_distance", p.knn->nearest_distance}};
    }
    if (p.pnn) {
        out["pnn"] = {{"label", p.pnn->label}, {"log_densities", p.pnn->log_densities}};
    }
    return json_response(200, out);
}

}  // namespace blockctm::service
