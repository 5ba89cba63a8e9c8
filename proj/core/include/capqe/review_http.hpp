#pragma once

// JSON API over a ReviewService:
//   GET  /api/queue?page=&size=          {"items": [ReviewItem], "page", "size", "total"}
//   GET  /api/captions/{id}              CaptionRecord plus "image_file_ref"
//   POST /api/captions/{id}/rescore      {"text"} -> {"caption_id", "back_translation", "scores"}
//   POST /api/captions/{id}/accept       {"text", "revision"} -> CaptionRecord
//   POST /api/captions/{id}/reject       {"revision"} -> CaptionRecord
//   GET  /api/stats                      {"counts", "total", "queue", "config"}
// Errors are {"code", "message"} with status 400 (malformed request),
// 404 (not_found), 409 (conflict), 422 (validation, invalid_state) or
// 502 (provider).

#include <memory>
#include <string>

#include "capqe/review_service.hpp"

namespace capqe {

class ReviewHttpServer {
 public:
  // `static_dir`, when non-empty, is served under "/".
  explicit ReviewHttpServer(std::shared_ptr<ReviewService> service, std::string static_dir = {});
  ~ReviewHttpServer();

  ReviewHttpServer(const ReviewHttpServer&) = delete;
  ReviewHttpServer& operator=(const ReviewHttpServer&) = delete;

  // Returns the bound port (an ephemeral one when port is 0). Throws ArgumentError.
  int bind(const std::string& host, int port);
  // Blocks serving requests until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace capqe
