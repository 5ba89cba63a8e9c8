#pragma once

// Deterministic in-process providers. Every output is a pure function of
// (inputs, seed, knobs) and uses only exactly-rounded float operations, so
// results are byte-identical across runs and platforms.

#include <map>
#include <string>

#include "capqe/providers.hpp"

namespace capqe {

// Reversible token tagging: source->target prefixes every whitespace-delimited
// token with "ur_", target->source strips one such prefix. Whitespace runs are
// preserved, so back(forward(x)) == x for any x.
class MockTranslator final : public Translator {
 public:
  static constexpr std::string_view kTag = "ur_";

  std::vector<std::string> translate(std::span<const std::string> texts,
                                     Direction direction) override;

  static std::string forward(std::string_view text);
  static std::string backward(std::string_view text);
};

// Deterministic pseudo-random unit vector for `key`.
EmbeddingVector mock_unit_vector(std::string_view key, int dim, std::uint64_t seed);

// Lowercased standard-tokenizer tokens, as the mocks see a text.
std::vector<std::string> mock_tokens(std::string_view text);

// One unit vector per token, seeded by hash(token, seed). A text without
// tokens embeds as the single token "∅".
class MockTextEmbedder final : public TextEmbedder {
 public:
  MockTextEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  std::vector<TokenEmbeddingSequence> embed_text_tokens(std::span<const std::string> texts) override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Bag-of-words embedding shared by images and texts: the normalized sum of
// the token vectors of the string's non-punctuation tokens. An image_ref and
// a text that are equal strings embed identically.
class MockMultimodalEmbedder final : public MultimodalEmbedder {
 public:
  MockMultimodalEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  MultimodalEmbedding embed_multimodal(std::span<const std::string> image_refs,
                                       std::span<const std::string> texts) override;
  EmbeddingVector embed_string(std::string_view s) const;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Reference-free QE mock. Output = clamp(base * agreement, 0, 1) where base is
// uniform in [mean - 0.1, mean + 0.1] seeded by (seed, src, tgt) and agreement
// is the token F1 between MockTranslator::backward(tgt) and src. Faithful mock
// translations therefore average `mean`. fixed_value overrides everything.
class MockQeScorer final : public QeScorer {
 public:
  MockQeScorer(double mean, std::optional<double> fixed_value, std::uint64_t seed)
      : mean_(mean), fixed_(fixed_value), seed_(seed) {}
  std::vector<double> qe_score(std::span<const std::string> src_texts,
                               std::span<const std::string> tgt_texts) override;

 private:
  double mean_;
  std::optional<double> fixed_;
  std::uint64_t seed_;
};

// Exact-match rewrites first; otherwise every substitution (in key order) is
// applied as a replace-all. Empty tables make this the identity.
class MockRefiner final : public Refiner {
 public:
  MockRefiner(std::map<std::string, std::string> rewrites,
              std::map<std::string, std::string> substitutions)
      : rewrites_(std::move(rewrites)), substitutions_(std::move(substitutions)) {}
  std::vector<std::string> refine(std::span<const std::string> texts,
                                  std::string_view instructions) override;

 private:
  std::map<std::string, std::string> rewrites_;
  std::map<std::string, std::string> substitutions_;
};

}  // namespace capqe
