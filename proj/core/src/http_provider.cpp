#include "capqe/http_provider.hpp"

#include <httplib.h>

#include <cmath>
#include <thread>

#include "capqe/error.hpp"
#include "json_codec.hpp"

namespace capqe {

using detail::json;

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < cap_; });
  ++in_flight_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

int InFlightLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

namespace {

struct LimiterGuard {
  explicit LimiterGuard(InFlightLimiter& l) : limiter(l) { limiter.acquire(); }
  ~LimiterGuard() { limiter.release(); }
  InFlightLimiter& limiter;
};

std::vector<std::string> string_outputs(const json& body, std::size_t expected, const char* op) {
  auto out = detail::required<std::vector<std::string>>(body, "outputs");
  if (out.size() != expected) {
    throw ProviderError(std::string(op) + ": expected " + std::to_string(expected) +
                        " outputs, got " + std::to_string(out.size()));
  }
  return out;
}

EmbeddingVector to_vector(const json& j) {
  EmbeddingVector v;
  v.values = j.get<std::vector<double>>();
  return v;
}

EmbeddingVector to_unit_vector(const json& j) {
  EmbeddingVector v = to_vector(j);
  double s = 0.0;
  for (double x : v.values) s += x * x;
  if (s == 0.0) throw ProviderError("embed_multimodal: zero vector in response");
  const double n = std::sqrt(s);
  for (double& x : v.values) x /= n;
  return v;
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.max_in_flight) {
  if (config_.endpoint.empty()) throw ConfigError("http provider requires an endpoint");
  const auto scheme_end = config_.endpoint.find("://");
  const auto path_start =
      config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  host_ = config_.endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    base_path_ = config_.endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
}

std::string HttpProvider::post(const std::string& path, const std::string& body) {
  LimiterGuard guard(limiter_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(10 * attempt));
    httplib::Client client(host_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    ++requests_sent_;
    auto res = client.Post(base_path_ + path, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProviderError(path + ": HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    return res->body;
  }
  throw ProviderError(path + " failed after " + std::to_string(config_.max_retries + 1) +
                      " attempt(s): " + last_error);
}

namespace {

json parse_body(const std::string& body, const std::string& op) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(op + ": malformed response: " + e.what());
  }
}

template <typename Fn>
auto decode(const std::string& op, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ProviderError(op + ": malformed response: " + e.what());
  }
}

}  // namespace

std::vector<std::string> HttpProvider::translate(std::span<const std::string> texts,
                                                 Direction direction) {
  require_non_empty_batch(texts.size(), "translate");
  json req{{"texts", std::vector<std::string>(texts.begin(), texts.end())},
           {"direction", direction == Direction::SourceToTarget ? "src2tgt" : "tgt2src"}};
  const json body = parse_body(post("/translate", req.dump()), "translate");
  return decode("translate", [&] { return string_outputs(body, texts.size(), "translate"); });
}

std::vector<TokenEmbeddingSequence> HttpProvider::embed_text_tokens(
    std::span<const std::string> texts) {
  require_non_empty_batch(texts.size(), "embed_text_tokens");
  json req{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const json body = parse_body(post("/embed_tokens", req.dump()), "embed_text_tokens");
  return decode("embed_text_tokens", [&] {
    const auto& outputs = detail::required<json>(body, "outputs");
    if (outputs.size() != texts.size()) {
      throw ProviderError("embed_text_tokens: expected " + std::to_string(texts.size()) +
                          " outputs, got " + std::to_string(outputs.size()));
    }
    std::vector<TokenEmbeddingSequence> out;
    std::size_t dim = 0;
    for (const auto& seq_json : outputs) {
      TokenEmbeddingSequence seq;
      for (const auto& v : seq_json) {
        seq.push_back(to_vector(v));
        if (dim == 0) dim = seq.back().dim();
        if (seq.back().dim() != dim || dim == 0) {
          throw ProviderError("embed_text_tokens: non-uniform embedding dimension");
        }
      }
      if (seq.empty()) throw ProviderError("embed_text_tokens: empty token sequence");
      out.push_back(std::move(seq));
    }
    return out;
  });
}

MultimodalEmbedding HttpProvider::embed_multimodal(std::span<const std::string> image_refs,
                                                   std::span<const std::string> texts) {
  require_non_empty_batch(image_refs.size(), "embed_multimodal(image_refs)");
  require_non_empty_batch(texts.size(), "embed_multimodal(texts)");
  json req{{"image_refs", std::vector<std::string>(image_refs.begin(), image_refs.end())},
           {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const json body = parse_body(post("/embed_multimodal", req.dump()), "embed_multimodal");
  return decode("embed_multimodal", [&] {
    MultimodalEmbedding out;
    for (const auto& v : detail::required<json>(body, "image_vectors")) {
      out.image_vectors.push_back(to_unit_vector(v));
    }
    for (const auto& v : detail::required<json>(body, "text_vectors")) {
      out.text_vectors.push_back(to_unit_vector(v));
    }
    out.model_tag = body.value("model_tag", "");
    if (out.image_vectors.size() != image_refs.size() || out.text_vectors.size() != texts.size()) {
      throw ProviderError("embed_multimodal: response counts do not match request");
    }
    const std::size_t dim = out.image_vectors.front().dim();
    for (const auto* group : {&out.image_vectors, &out.text_vectors}) {
      for (const auto& v : *group) {
        if (v.dim() != dim) throw ProviderError("embed_multimodal: non-uniform dimension");
      }
    }
    return out;
  });
}

std::vector<double> HttpProvider::qe_score(std::span<const std::string> src_texts,
                                           std::span<const std::string> tgt_texts) {
  require_non_empty_batch(src_texts.size(), "qe_score");
  require_same_length(src_texts.size(), tgt_texts.size(), "qe_score");
  json pairs = json::array();
  for (std::size_t i = 0; i < src_texts.size(); ++i) {
    pairs.push_back(json{{"src", src_texts[i]}, {"tgt", tgt_texts[i]}});
  }
  const json body = parse_body(post("/qe_score", json{{"pairs", pairs}}.dump()), "qe_score");
  return decode("qe_score", [&] {
    auto out = detail::required<std::vector<double>>(body, "outputs");
    if (out.size() != src_texts.size()) {
      throw ProviderError("qe_score: expected " + std::to_string(src_texts.size()) +
                          " outputs, got " + std::to_string(out.size()));
    }
    return out;
  });
}

std::vector<std::string> HttpProvider::refine(std::span<const std::string> texts,
                                              std::string_view instructions) {
  require_non_empty_batch(texts.size(), "refine");
  json req{{"texts", std::vector<std::string>(texts.begin(), texts.end())},
           {"instructions", std::string(instructions)}};
  const json body = parse_body(post("/refine", req.dump()), "refine");
  return decode("refine", [&] { return string_outputs(body, texts.size(), "refine"); });
}

}  // namespace capqe
