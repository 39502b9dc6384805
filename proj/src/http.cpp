#include <functional>

#include "httplib.h"

#include "fmcq/service.hpp"

namespace fmcq {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {}
};

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

void guarded(httplib::Response& res, const std::function<Json()>& handler, int ok = 200) {
  try {
    reply(res, ok, handler());
  } catch (const std::exception& e) {
    auto [status, body] = error_response(e);
    reply(res, status, body);
  }
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  Service& svc = impl_->service;
  auto& s = impl_->server;

  s.Post("/models", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(
        res,
        [&] {
          std::optional<ModelFormat> format;
          if (req.has_param("format")) format = parse_format(req.get_param_value("format"));
          return svc.handle_upload(req.body, format, req.get_param_value("name"));
        },
        201);
  });
  s.Get(R"(/models/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_model(req.matches[1]); });
  });
  s.Get(R"(/models/([^/]+)/analysis)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_analysis(req.matches[1]); });
  });
  s.Post(R"(/models/([^/]+)/solve)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_solve(req.matches[1], parse_body(req)); });
  });
  s.Post(R"(/models/([^/]+)/count)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_count(req.matches[1], parse_body(req)); });
  });
  s.Post(R"(/models/([^/]+)/diagnose)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_diagnose(req.matches[1], parse_body(req)); });
  });
  s.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_create_session(parse_body(req)); }, 201);
  });
  s.Get(R"(/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_session(req.matches[1]); });
  });
  s.Post(R"(/sessions/([^/]+)/step)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.handle_step(req.matches[1], parse_body(req)); });
  });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    Json body{{"api_version", kApiVersion}, {"error", {{"kind", "not_found"}, {"message", "no such endpoint"}}}};
    res.set_content(body.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    const int bound = s.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!s.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace fmcq
