#include "blockctm/http_server.hpp"

#include "httplib.h"

#include "blockctm/error.hpp"

namespace blockctm::service {

struct HttpServer::Impl {
    Impl(ApiHandler& h, ServerOptions o) : handler(h), options(std::move(o)) {}
    ApiHandler& handler;
    ServerOptions options;
    httplib::Server server;
    bool bound = false;
};

namespace {

void forward(ApiHandler& handler, const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = handler.handle(ApiRequest{req.method, req.path, req.body});
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    if (!r.body.empty()) res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(ApiHandler& handler, ServerOptions options)
    : impl_(std::make_unique<Impl>(handler, std::move(options))) {
    httplib::Server& srv = impl_->server;
    ApiHandler& h = impl_->handler;
    const auto route = [&h](const httplib::Request& req, httplib::Response& res) { forward(h, req, res); };
    for (const char* pattern : {"/health", "/sessions", R"(/sessions/.*)"}) {
        srv.Get(pattern, route);
        srv.Post(pattern, route);
        srv.Put(pattern, route);
        srv.Delete(pattern, route);
    }
    if (impl_->options.static_dir) {
        if (!srv.set_mount_point("/", impl_->options.static_dir->string())) {
            throw IoError("static directory '" + impl_->options.static_dir->string() + "' is not readable");
        }
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    Impl& i = *impl_;
    int port = i.options.port;
    if (port == 0) {
        port = i.server.bind_to_any_port(i.options.host);
        if (port < 0) throw IoError("cannot bind " + i.options.host);
    } else if (!i.server.bind_to_port(i.options.host, port)) {
        throw IoError("cannot bind " + i.options.host + ":" + std::to_string(port));
    }
    i.bound = true;
    return port;
}

void HttpServer::run() {
    if (!impl_->bound) throw PreconditionError("HttpServer::run before bind");
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace blockctm::service
