#include "oscdamp/server.hpp"

#include <httplib.h>

#include "oscdamp/error.hpp"

namespace oscdamp {

struct Server::Impl {
    const ApiSnapshot& snap;
    httplib::Server http;

    explicit Impl(const ApiSnapshot& s) : snap(s)
    {
        auto serve = [this](const httplib::Request& req, httplib::Response& res) {
            QueryMap q;
            for (const auto& [k, v] : req.params) q.emplace(k, v);
            const ApiResponse r = handle(snap, req.method, req.path, q, req.body);
            res.status = r.status;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(r.body, "application/json");
        };
        http.Get(R"(/api/.*)", serve);
        http.Post(R"(/api/.*)", serve);
        http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "GET, POST");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) res.set_content(R"({"schema_version":1,"error":"no such endpoint"})", "application/json");
        });
    }
};

Server::Server(const ApiSnapshot& snap) : impl_(std::make_unique<Impl>(snap)) {}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop()
{
    if (impl_) impl_->http.stop();
}

} // namespace oscdamp
