#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capqe/qe.hpp"

namespace capqe {

enum class ProviderKind { Translator, TextEmbedder, MultimodalEmbedder, QeScorer, Refiner };
enum class Backend { Mock, Http };

std::string_view to_string(ProviderKind kind);
std::string_view to_string(Backend backend);
ProviderKind parse_provider_kind(std::string_view name);
Backend parse_backend(std::string_view name);

struct ProviderConfig {
  ProviderKind kind{ProviderKind::Translator};
  Backend backend{Backend::Mock};
  std::string endpoint;  // base URI, required iff backend == Http
  std::chrono::milliseconds timeout{30000};
  int max_retries{2};
  int max_in_flight{4};
  std::uint64_t seed{0};

  // Mock knobs.
  int dim{64};                      // embedders
  double mean{0.76};                // qe scorer calibration mean
  std::optional<double> fixed_value;  // qe scorer: constant output
  std::map<std::string, std::string> rewrites;       // refiner: whole-text replacements
  std::map<std::string, std::string> substitutions;  // refiner: substring replacements
  // Multimodal: image vectors come from this precomputed file when set.
  std::string embedding_file;

  // Throws ConfigError.
  void validate() const;
};

enum class Direction { SourceToTarget, TargetToSource };

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::vector<std::string> translate(std::span<const std::string> texts,
                                             Direction direction) = 0;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<TokenEmbeddingSequence> embed_text_tokens(
      std::span<const std::string> texts) = 0;
};

struct MultimodalEmbedding {
  std::vector<EmbeddingVector> image_vectors;
  std::vector<EmbeddingVector> text_vectors;
  std::string model_tag;
};

class MultimodalEmbedder {
 public:
  virtual ~MultimodalEmbedder() = default;
  // Unit-normalized vectors in one shared space.
  virtual MultimodalEmbedding embed_multimodal(std::span<const std::string> image_refs,
                                               std::span<const std::string> texts) = 0;
};

class QeScorer {
 public:
  virtual ~QeScorer() = default;
  virtual std::vector<double> qe_score(std::span<const std::string> src_texts,
                                       std::span<const std::string> tgt_texts) = 0;
};

class Refiner {
 public:
  virtual ~Refiner() = default;
  virtual std::vector<std::string> refine(std::span<const std::string> texts,
                                          std::string_view instructions) = 0;
};

struct ProviderSet {
  std::shared_ptr<Translator> translator;
  std::shared_ptr<TextEmbedder> text_embedder;
  std::shared_ptr<MultimodalEmbedder> multimodal_embedder;
  std::shared_ptr<QeScorer> qe_scorer;
  std::shared_ptr<Refiner> refiner;
};

inline ProviderConfig default_provider_config(ProviderKind kind) {
  ProviderConfig c;
  c.kind = kind;
  return c;
}

struct ProvidersConfig {
  ProviderConfig translator = default_provider_config(ProviderKind::Translator);
  ProviderConfig text_embedder = default_provider_config(ProviderKind::TextEmbedder);
  ProviderConfig multimodal_embedder = default_provider_config(ProviderKind::MultimodalEmbedder);
  ProviderConfig qe_scorer = default_provider_config(ProviderKind::QeScorer);
  ProviderConfig refiner = default_provider_config(ProviderKind::Refiner);
};

std::shared_ptr<Translator> make_translator(const ProviderConfig& config);
std::shared_ptr<TextEmbedder> make_text_embedder(const ProviderConfig& config);
std::shared_ptr<MultimodalEmbedder> make_multimodal_embedder(const ProviderConfig& config);
std::shared_ptr<QeScorer> make_qe_scorer(const ProviderConfig& config);
std::shared_ptr<Refiner> make_refiner(const ProviderConfig& config);
ProviderSet make_providers(const ProvidersConfig& config);

// Shared argument checks for implementations.
void require_non_empty_batch(std::size_t n, std::string_view op);
void require_same_length(std::size_t a, std::size_t b, std::string_view op);

}  // namespace capqe
