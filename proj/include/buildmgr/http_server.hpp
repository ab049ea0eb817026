#pragma once

#include <memory>
#include <string>

#include "buildmgr/web_app.hpp"

namespace httplib {
class Server;
}

namespace buildmgr {

// Plain HTTP/1.1 front end for a WebApp. TLS is left to a reverse proxy.
class HttpServer {
 public:
  explicit HttpServer(WebApp& app);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Io.
  int bind(const std::string& address, int port);
  // Serves until stop(); call after bind().
  void run();
  // Blocks until run() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  WebApp& app_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace buildmgr
