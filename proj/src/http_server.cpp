#include "buildmgr/http_server.hpp"

#include <httplib.h>

#include "buildmgr/error.hpp"

namespace buildmgr {

HttpServer::HttpServer(WebApp& app) : app_(app), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> form;
    for (const auto& [key, value] : req.params) form.emplace(key, value);
    // HEAD is answered from the GET response; httplib drops the body but
    // keeps Content-Length.
    const bool head = req.method == "HEAD";
    auto out = app_.handle(head ? "GET" : req.method, req.path, form);
    res.status = out.status;
    std::string type = "text/plain";
    for (const auto& [key, value] : out.headers) {
      if (key == "Content-Type") {
        type = value;
      } else {
        res.set_header(key, value);
      }
    }
    res.set_content(out.body, type);
  };
  const std::string any = ".*";
  server_->Get(any, handler);
  server_->Post(any, handler);
  server_->Put(any, handler);
  server_->Delete(any, handler);
  server_->Patch(any, handler);
  server_->Options(any, handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& address, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(address);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + address);
    return bound;
  }
  if (!server_->bind_to_port(address, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + address + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::stop() {
  if (server_->is_running()) server_->stop();
}

}  // namespace buildmgr
