#include "capqe/mock_providers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "capqe/error.hpp"
#include "capqe/hashing.hpp"
#include "capqe/metrics.hpp"
#include "capqe/utf8.hpp"

namespace capqe {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

template <typename Fn>
std::string map_tokens(std::string_view text, Fn&& fn) {
  std::string out;
  out.reserve(text.size() + 8);
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    out += fn(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> whitespace_tokens(std::string_view text) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    toks.push_back(text.substr(i, j - i));
    i = j;
  }
  return toks;
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

void normalize(EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  const double n = std::sqrt(s);
  if (n == 0.0) {
    v.values[0] = 1.0;
    return;
  }
  for (double& x : v.values) x /= n;
}

constexpr std::string_view kEmptyToken = "\xE2\x88\x85";

}  // namespace

std::string MockTranslator::forward(std::string_view text) {
  return map_tokens(text, [](std::string_view tok) { return std::string(kTag) + std::string(tok); });
}

std::string MockTranslator::backward(std::string_view text) {
  return map_tokens(text, [](std::string_view tok) {
    if (tok.starts_with(kTag)) tok.remove_prefix(kTag.size());
    return std::string(tok);
  });
}

std::vector<std::string> MockTranslator::translate(std::span<const std::string> texts,
                                                   Direction direction) {
  require_non_empty_batch(texts.size(), "translate");
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    out.push_back(direction == Direction::SourceToTarget ? forward(t) : backward(t));
  }
  return out;
}

EmbeddingVector mock_unit_vector(std::string_view key, int dim, std::uint64_t seed) {
  std::uint64_t state = fnv1a64(key) ^ (seed * 0x9e3779b97f4a7c15ULL);
  EmbeddingVector v;
  v.values.resize(static_cast<std::size_t>(dim));
  for (double& x : v.values) x = 2.0 * unit_interval(splitmix64(state)) - 1.0;
  normalize(v);
  return v;
}

std::vector<std::string> mock_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(text, TokenizerId::Standard)) {
    std::u32string lower = tok;
    for (char32_t& c : lower) {
      if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    }
    out.push_back(utf8::encode(lower));
  }
  return out;
}

std::vector<TokenEmbeddingSequence> MockTextEmbedder::embed_text_tokens(
    std::span<const std::string> texts) {
  require_non_empty_batch(texts.size(), "embed_text_tokens");
  std::vector<TokenEmbeddingSequence> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto toks = mock_tokens(t);
    if (toks.empty()) toks.emplace_back(kEmptyToken);
    TokenEmbeddingSequence seq;
    seq.reserve(toks.size());
    for (const auto& tok : toks) seq.push_back(mock_unit_vector(tok, dim_, seed_));
    out.push_back(std::move(seq));
  }
  return out;
}

EmbeddingVector MockMultimodalEmbedder::embed_string(std::string_view s) const {
  EmbeddingVector sum;
  sum.values.assign(static_cast<std::size_t>(dim_), 0.0);
  bool any = false;
  for (const auto& tok : mock_tokens(s)) {
    const auto cps = utf8::decode(tok);
    if (cps.size() == 1 && utf8::is_punctuation(cps[0])) continue;
    const auto v = mock_unit_vector(tok, dim_, seed_ + 1);
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += v.values[i];
    any = true;
  }
  if (!any) return mock_unit_vector(s.empty() ? kEmptyToken : s, dim_, seed_ + 1);
  normalize(sum);
  return sum;
}

MultimodalEmbedding MockMultimodalEmbedder::embed_multimodal(std::span<const std::string> image_refs,
                                                             std::span<const std::string> texts) {
  require_non_empty_batch(image_refs.size(), "embed_multimodal(image_refs)");
  require_non_empty_batch(texts.size(), "embed_multimodal(texts)");
  MultimodalEmbedding out;
  out.model_tag = "mock-multimodal-" + std::to_string(dim_);
  for (const auto& r : image_refs) out.image_vectors.push_back(embed_string(r));
  for (const auto& t : texts) out.text_vectors.push_back(embed_string(t));
  return out;
}

std::vector<double> MockQeScorer::qe_score(std::span<const std::string> src_texts,
                                           std::span<const std::string> tgt_texts) {
  require_non_empty_batch(src_texts.size(), "qe_score");
  require_same_length(src_texts.size(), tgt_texts.size(), "qe_score");
  std::vector<double> out;
  out.reserve(src_texts.size());
  for (std::size_t i = 0; i < src_texts.size(); ++i) {
    if (fixed_) {
      out.push_back(*fixed_);
      continue;
    }
    std::string key = src_texts[i];
    key.push_back('\x1f');
    key += tgt_texts[i];
    std::uint64_t state = fnv1a64(key) ^ (seed_ * 0x9e3779b97f4a7c15ULL);
    const double base = mean_ + 0.1 * (2.0 * unit_interval(splitmix64(state)) - 1.0);

    const std::string back = MockTranslator::backward(tgt_texts[i]);
    std::map<std::string_view, long> src_counts;
    const auto src_toks = whitespace_tokens(src_texts[i]);
    const auto back_toks = whitespace_tokens(back);
    for (auto t : src_toks) ++src_counts[t];
    long common = 0;
    for (auto t : back_toks) {
      auto it = src_counts.find(t);
      if (it != src_counts.end() && it->second > 0) {
        --it->second;
        ++common;
      }
    }
    const double denom = static_cast<double>(src_toks.size() + back_toks.size());
    const double agreement = denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(common) / denom;
    out.push_back(std::clamp(base * agreement, 0.0, 1.0));
  }
  return out;
}

std::vector<std::string> MockRefiner::refine(std::span<const std::string> texts,
                                             std::string_view /*instructions*/) {
  require_non_empty_batch(texts.size(), "refine");
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (auto it = rewrites_.find(t); it != rewrites_.end()) {
      out.push_back(it->second);
      continue;
    }
    std::string s = t;
    for (const auto& [from, to] : substitutions_) {
      if (from.empty()) continue;
      std::size_t pos = 0;
      while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace capqe
