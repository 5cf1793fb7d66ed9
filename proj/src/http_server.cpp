#include "apidm/http_server.hpp"

#include <httplib.h>

#include "apidm/error.hpp"

namespace apidm {

struct HttpServer::Impl {
    SessionService& service;
    httplib::Server server;
    bool bound = false;

    explicit Impl(SessionService& s) : service(s) {}

    void forward(const httplib::Request& req, httplib::Response& res) {
        const auto out = service.handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    }
};

HttpServer::HttpServer(SessionService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto& server = impl_->server;
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->forward(req, res); };
    for (const char* pattern : {R"(/sessions(/.*)?)", R"(/corpora)", R"(/policies)"}) {
        server.Get(pattern, handler);
        server.Post(pattern, handler);
        server.Delete(pattern, handler);
    }
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    if (static_dir) {
        if (!std::filesystem::is_directory(*static_dir)) {
            throw ConfigError("static directory " + static_dir->string() + " does not exist");
        }
        server.set_mount_point("/", static_dir->string());
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound_port = port;
    if (port == 0) {
        bound_port = impl_->server.bind_to_any_port(host);
        if (bound_port < 0) throw ConfigError("cannot bind " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->bound = true;
    return bound_port;
}

void HttpServer::listen() {
    if (!impl_->bound) throw ContractError("listen() before bind()");
    impl_->server.listen_after_bind();
}

void HttpServer::start() {
    if (!impl_->bound) throw ContractError("start() before bind()");
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace apidm
