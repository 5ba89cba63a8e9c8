#include "capqe/review_http.hpp"

#include <httplib.h>

#include <charconv>

#include "capqe/error.hpp"
#include "json_codec.hpp"

namespace capqe {

using detail::json;

namespace {

json item_json(const ReviewItem& it) {
  return json{{"caption_id", it.caption_id},
              {"image_file_ref", it.image_file_ref},
              {"source_text", it.source_text},
              {"current_translation", it.current_translation},
              {"back_translation", it.back_translation},
              {"scores", detail::scores_to_json(it.scores)},
              {"revision", it.revision}};
}

json components_json(const ComponentValues& v) {
  return json{{"comet", v.comet}, {"bert", v.bert}, {"clip", v.clip}};
}

int status_for(const Error& e) {
  const std::string code = e.code();
  if (code == "not_found") return 404;
  if (code == "conflict") return 409;
  if (code == "validation" || code == "invalid_state") return 422;
  if (code == "provider" || code == "transient") return 502;
  if (code == "argument" || code == "parse") return 400;
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, json{{"code", code}, {"message", message}});
}

CaptionId path_id(const httplib::Request& req) {
  const std::string s = req.matches[1];
  CaptionId id{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ArgumentError("bad caption id '" + s + "'");
  }
  return id;
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string s = req.get_param_value(key);
  std::size_t v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ArgumentError(std::string("query parameter '") + key + "' must be a non-negative integer");
  }
  return v;
}

json body_json(const httplib::Request& req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw ArgumentError("request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T body_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

struct ReviewHttpServer::Impl {
  std::shared_ptr<ReviewService> service;
  httplib::Server server;

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, status_for(e), e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/queue", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t page = query_size(req, "page", 0);
      const std::size_t size = query_size(req, "size", 20);
      json items = json::array();
      for (const auto& it : service->list_queue(page, size)) items.push_back(item_json(it));
      send_json(res, 200,
                json{{"items", items},
                     {"page", page},
                     {"size", size},
                     {"total", service->queue_size()}});
    }));
    server.Get(R"(/api/captions/(-?\d+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto rec = service->get(path_id(req));
                 json j = detail::record_to_json(rec);
                 j["image_file_ref"] = service->item(rec).image_file_ref;
                 send_json(res, 200, j);
               }));
    server.Post(R"(/api/captions/(-?\d+)/rescore)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const CaptionId id = path_id(req);
                  const json body = body_json(req);
                  const auto scored = service->rescore(id, body_field<std::string>(body, "text"));
                  send_json(res, 200,
                            json{{"caption_id", id},
                                 {"back_translation", scored.back_translation},
                                 {"scores", detail::scores_to_json(scored.scores)}});
                }));
    server.Post(R"(/api/captions/(-?\d+)/accept)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const CaptionId id = path_id(req);
                  const json body = body_json(req);
                  const auto rec = service->accept(id, body_field<std::string>(body, "text"),
                                                   body_field<std::uint64_t>(body, "revision"));
                  send_json(res, 200, detail::record_to_json(rec));
                }));
    server.Post(R"(/api/captions/(-?\d+)/reject)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const CaptionId id = path_id(req);
                  const json body = body_json(req);
                  const auto rec =
                      service->reject(id, body_field<std::uint64_t>(body, "revision"));
                  send_json(res, 200, detail::record_to_json(rec));
                }));
    server.Get("/api/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto stats = service->stats();
      json counts = json::object();
      for (const auto& [status, n] : stats.counts) counts[std::string(to_string(status))] = n;
      const QEConfig& qe = service->qe_config();
      send_json(res, 200,
                json{{"counts", counts},
                     {"total", stats.total},
                     {"queue", stats.counts.at(CaptionStatus::NeedsManualReview)},
                     {"config",
                      {{"threshold", qe.threshold},
                       {"weights", components_json(qe.weights)},
                       {"component_thresholds", components_json(qe.component_thresholds)}}}});
    }));
  }
};

ReviewHttpServer::ReviewHttpServer(std::shared_ptr<ReviewService> service, std::string static_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  impl_->routes();
  if (!static_dir.empty() && !impl_->server.set_mount_point("/", static_dir)) {
    throw ArgumentError("static asset directory " + static_dir + " does not exist");
  }
}

ReviewHttpServer::~ReviewHttpServer() { stop(); }

int ReviewHttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw ArgumentError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw ArgumentError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ReviewHttpServer::serve() { impl_->server.listen_after_bind(); }

void ReviewHttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace capqe
