#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "apidm/service.hpp"

namespace apidm {

/// JSON-over-HTTP front end for a SessionService, optionally hosting a static UI bundle.
class HttpServer {
public:
    HttpServer(SessionService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and returns the port; port 0 picks a free one.
    int bind(const std::string& host, int port);
    /// Serves until stop(); requires bind().
    void listen();
    /// listen() on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace apidm
