#pragma once

// HTTP client for externally hosted models. Wire format (JSON bodies):
//   POST /translate        {"texts": [...], "direction": "src2tgt"|"tgt2src"} -> {"outputs": [...]}
//   POST /embed_tokens     {"texts": [...]} -> {"outputs": [[[f, ...], ...], ...], "model_tag": s}
//   POST /embed_multimodal {"image_refs": [...], "texts": [...]}
//                          -> {"image_vectors": [[f, ...]], "text_vectors": [[f, ...]], "model_tag": s}
//   POST /qe_score         {"pairs": [{"src": s, "tgt": s}, ...]} -> {"outputs": [f, ...]}
//   POST /refine           {"texts": [...], "instructions": s} -> {"outputs": [...]}
// Transport failures and 5xx responses are retried up to max_retries times;
// 4xx responses and malformed bodies fail immediately.

#include <atomic>
#include <condition_variable>
#include <mutex>

#include "capqe/providers.hpp"

namespace capqe {

// Caps concurrent requests; callers block while the cap is reached.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int cap) : cap_(cap < 1 ? 1 : cap) {}
  void acquire();
  void release();
  int in_flight() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int cap_;
  int in_flight_{0};
};

class HttpProvider final : public Translator,
                           public TextEmbedder,
                           public MultimodalEmbedder,
                           public QeScorer,
                           public Refiner {
 public:
  explicit HttpProvider(ProviderConfig config);

  std::vector<std::string> translate(std::span<const std::string> texts,
                                     Direction direction) override;
  std::vector<TokenEmbeddingSequence> embed_text_tokens(std::span<const std::string> texts) override;
  MultimodalEmbedding embed_multimodal(std::span<const std::string> image_refs,
                                       std::span<const std::string> texts) override;
  std::vector<double> qe_score(std::span<const std::string> src_texts,
                               std::span<const std::string> tgt_texts) override;
  std::vector<std::string> refine(std::span<const std::string> texts,
                                  std::string_view instructions) override;

  // Requests sent, retries included.
  std::uint64_t requests_sent() const { return requests_sent_.load(); }

 private:
  std::string post(const std::string& path, const std::string& body);

  ProviderConfig config_;
  std::string host_;        // scheme://host[:port]
  std::string base_path_;   // optional path prefix, no trailing slash
  InFlightLimiter limiter_;
  std::atomic<std::uint64_t> requests_sent_{0};
};

}  // namespace capqe
