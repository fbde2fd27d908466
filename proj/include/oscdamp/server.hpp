#pragma once

#include <memory>
#include <string>

#include "oscdamp/api.hpp"

namespace oscdamp {

// HTTP front end over handle().  The snapshot must outlive the server.
class Server {
public:
    explicit Server(const ApiSnapshot& snap);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds the socket; port 0 picks a free one.  Returns the bound port.
    // Throws Error when the bind fails.
    int bind(const std::string& host, int port);
    // Blocks until stop() is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace oscdamp
