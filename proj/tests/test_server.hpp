#pragma once

#include <memory>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "mtmc/service.hpp"

namespace mtmc::testing {

/// Service bound to a free localhost port on a background thread.
class TestServer {
public:
    explicit TestServer(EvaluationMatrix matrix) : service_(std::move(matrix)) {
        service_.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw std::runtime_error("cannot bind test server");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer() {
        server_.stop();
        thread_.join();
    }
    TestServer(const TestServer&) = delete;
    TestServer& operator=(const TestServer&) = delete;

    int port() const { return port_; }
    const Service& service() const { return service_; }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

private:
    Service service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace mtmc::testing
