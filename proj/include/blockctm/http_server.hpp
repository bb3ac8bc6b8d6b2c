#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "blockctm/service.hpp"

namespace blockctm::service {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 = any free port
    /// Served under "/" when set.
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end of an ApiHandler.
class HttpServer {
public:
    HttpServer(ApiHandler& handler, ServerOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket and returns the bound port. Throws IoError.
    int bind();
    /// Serves until stop(); requires bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace blockctm::service
