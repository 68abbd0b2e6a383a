#include "draftforge/http_api.hpp"

#include <functional>

#include <httplib.h>

#include "draftforge/codec.hpp"
#include "draftforge/error.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  json body = {{"error", e.name()}, {"message", e.what()}};
  if (e.kind() == ErrorKind::PlaceholdersUnresolved || e.kind() == ErrorKind::MalformedLine) body["count"] = e.count();
  send_json(res, http_status_for(e.kind()), body);
}

// Runs a handler, mapping library errors to status codes.
void guarded(httplib::Response& res, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e);
  } catch (const json::exception& e) {
    send_error(res, Error(ErrorKind::InvalidValue, std::string("invalid request body: ") + e.what()));
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = parse_json(req.body, ErrorKind::InvalidValue);
  if (!j.is_object()) fail(ErrorKind::InvalidValue, "request body must be a JSON object");
  return j;
}

std::string actor(const httplib::Request& req) {
  auto a = req.get_header_value("X-Actor");
  return a.empty() ? "officer" : a;
}

std::size_t parse_index(const std::string& text) {
  if (text.empty() || text.size() > 9 || text.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorKind::NotFound, "no placeholder " + text);
  return std::stoul(text);
}

}  // namespace

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::InvalidTransition:
    case ErrorKind::PlaceholdersUnresolved:
    case ErrorKind::SignatureMissing:
    case ErrorKind::UnknownPlaceholder:
    case ErrorKind::InvalidState: return 409;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::MalformedBackendOutput: return 502;
    case ErrorKind::TimeoutExceeded: return 504;
    case ErrorKind::IoFailure: return 500;
    default: return 422;
  }
}

HttpApi::HttpApi(ServiceConfig config)
    : service_(std::make_unique<ReviewService>(std::move(config))), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind() {
  const auto& c = service_->config();
  if (c.listen_port == 0) {
    port_ = server_->bind_to_any_port(c.listen_host);
  } else {
    port_ = server_->bind_to_port(c.listen_host, c.listen_port) ? c.listen_port : -1;
  }
  if (port_ < 0) fail(ErrorKind::IoFailure, "cannot bind " + c.listen_host + ":" + std::to_string(c.listen_port));
  return port_;
}

void HttpApi::listen() { server_->listen_after_bind(); }

int HttpApi::start() {
  const int port = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return port;
}

void HttpApi::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpApi::routes() {
  auto& svr = *server_;
  auto& svc = *service_;

  svr.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    const auto& token = service_->config().api_token;
    if (token && req.get_header_value("Authorization") != "Bearer " + *token) {
      send_json(res, 401, {{"error", "Unauthorized"}, {"message", "missing or wrong bearer token"}});
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  svr.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

  svr.Get("/cases", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, {{"case_ids", svc.case_ids()}}); });
  });

  svr.Post("/cases", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      body_json(req);
      send_json(res, 201, case_view(svc.create_case(actor(req))));
    });
  });

  svr.Get(R"(/cases/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, case_view(svc.get(req.matches[1]))); });
  });

  svr.Get(R"(/cases/([^/]+)/audit)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto record = svc.get(req.matches[1]);
      send_json(res, 200, {{"entries", record.audit}, {"head", record.audit_head}, {"verified", verify_audit(record)}});
    });
  });

  svr.Get(R"(/cases/([^/]+)/transcript)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.draft_transcript(req.matches[1])); });
  });

  svr.Get(R"(/cases/([^/]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, rms_export(svc.get(req.matches[1]))); });
  });

  svr.Post(R"(/cases/([^/]+)/evidence)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      EvidenceUpload upload;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("audio")) fail(ErrorKind::InvalidValue, "multipart upload needs an audio part");
        upload.audio = req.get_file_value("audio").content;
        if (req.has_file("sidecar")) upload.sidecar = req.get_file_value("sidecar").content;
      } else {
        upload.audio = req.body;
      }
      send_json(res, 201, case_view(svc.attach_evidence(req.matches[1], upload, actor(req))));
    });
  });

  svr.Post(R"(/cases/([^/]+)/metadata)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto metadata = body_json(req).get<CaseMetadata>();
      send_json(res, 200, case_view(svc.enter_metadata(req.matches[1], metadata, actor(req))));
    });
  });

  svr.Post(R"(/cases/([^/]+)/draft)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const bool regenerate = body_json(req).value("regenerate", false);
      const auto record = svc.generate(req.matches[1], regenerate, actor(req));
      send_json(res, 200, *record.draft);
    });
  });

  svr.Patch(R"(/cases/([^/]+)/placeholders/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string case_id = req.matches[1];
      const auto pid = parse_index(req.matches[2]);
      svc.get(case_id);
      const auto text = body_json(req).at("text").get<std::string>();
      send_json(res, 200, case_view(svc.resolve_placeholder(case_id, pid, text, actor(req))));
    });
  });

  svr.Patch(R"(/cases/([^/]+)/sections/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string case_id = req.matches[1];
      const auto section = parse_section_id(req.matches[2].str());
      if (!section) fail(ErrorKind::NotFound, "no section " + req.matches[2].str());
      svc.get(case_id);
      const auto text = body_json(req).at("text").get<std::string>();
      send_json(res, 200, case_view(svc.edit_section(case_id, *section, text, actor(req))));
    });
  });

  svr.Post(R"(/cases/([^/]+)/sign)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string case_id = req.matches[1];
      svc.get(case_id);
      const auto name = body_json(req).value("full_name", std::string());
      send_json(res, 200, case_view(svc.sign(case_id, name, actor(req))));
    });
  });

  svr.Post(R"(/cases/([^/]+)/submit)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto result = svc.submit(req.matches[1], actor(req));
      send_json(res, 200,
                {{"case", case_view(result.record)},
                 {"export_path", result.export_path.string()},
                 {"export_sha256", result.export_sha256}});
    });
  });
}

}  // namespace draftforge
