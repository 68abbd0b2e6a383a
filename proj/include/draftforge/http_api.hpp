#pragma once

// draftforge/http_api.hpp — JSON-over-HTTP surface of ReviewService.
//
//   GET    /health
//   GET    /cases                                   -> {"case_ids": [...]}
//   POST   /cases                                   -> 201 case view
//   GET    /cases/{id}                              -> case view
//   GET    /cases/{id}/audit                        -> {"entries", "head", "verified"}
//   GET    /cases/{id}/transcript                   -> transcript behind the current draft
//   GET    /cases/{id}/export                       -> RMS export document (409 before submit)
//   POST   /cases/{id}/evidence                     -> 201 case view
//          multipart parts "audio" and optional "sidecar", or a raw audio body
//   POST   /cases/{id}/metadata    CaseMetadata     -> case view
//   POST   /cases/{id}/draft       {"regenerate"?}  -> DraftDocument
//   PATCH  /cases/{id}/placeholders/{pid} {"text"}  -> case view
//   PATCH  /cases/{id}/sections/{section} {"text"}  -> case view
//   POST   /cases/{id}/sign        {"full_name"}    -> case view
//   POST   /cases/{id}/submit                       -> {"case", "export_path", "export_sha256"}
//
// Errors: {"error": <kind>, "message": ..., "count"?: n}. 404 unknown ids,
// 409 state conflicts (InvalidTransition family, UnknownPlaceholder,
// InvalidState), 422 validation, 502/504 backend failures, 401 bad token.
// The acting user is taken from the X-Actor header (default "officer").

#include <memory>
#include <string>
#include <thread>

#include "draftforge/error.hpp"
#include "draftforge/service.hpp"

namespace httplib {
class Server;
}

namespace draftforge {

int http_status_for(ErrorKind kind);

class HttpApi {
 public:
  explicit HttpApi(ServiceConfig config);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Binds to the configured address; returns the bound port.
  int bind();
  // Blocks until stop().
  void listen();
  // bind() + listen() on a background thread; returns the bound port.
  int start();
  void stop();

  ReviewService& service() noexcept { return *service_; }

 private:
  void routes();

  std::unique_ptr<ReviewService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace draftforge
