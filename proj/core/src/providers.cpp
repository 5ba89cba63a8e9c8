#include "capqe/providers.hpp"

#include "capqe/embedding_file.hpp"
#include "capqe/error.hpp"
#include "capqe/http_provider.hpp"
#include "capqe/mock_providers.hpp"

namespace capqe {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::Translator: return "translator";
    case ProviderKind::TextEmbedder: return "text_embedder";
    case ProviderKind::MultimodalEmbedder: return "multimodal_embedder";
    case ProviderKind::QeScorer: return "qe_scorer";
    case ProviderKind::Refiner: return "refiner";
  }
  return "?";
}

std::string_view to_string(Backend backend) { return backend == Backend::Mock ? "mock" : "http"; }

ProviderKind parse_provider_kind(std::string_view name) {
  for (auto k : {ProviderKind::Translator, ProviderKind::TextEmbedder,
                 ProviderKind::MultimodalEmbedder, ProviderKind::QeScorer, ProviderKind::Refiner}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown provider kind '" + std::string(name) + "'");
}

Backend parse_backend(std::string_view name) {
  if (name == "mock") return Backend::Mock;
  if (name == "http") return Backend::Http;
  throw ConfigError("unknown provider backend '" + std::string(name) + "' (expected mock|http)");
}

void ProviderConfig::validate() const {
  const std::string who(to_string(kind));
  if (backend == Backend::Http && endpoint.empty()) {
    throw ConfigError(who + ": endpoint is required for the http backend");
  }
  if (backend == Backend::Mock && !endpoint.empty()) {
    throw ConfigError(who + ": endpoint is only valid for the http backend");
  }
  if (max_retries < 0) throw ConfigError(who + ": max_retries must be >= 0");
  if (max_in_flight < 1) throw ConfigError(who + ": max_in_flight must be >= 1");
  if (timeout.count() <= 0) throw ConfigError(who + ": timeout must be positive");
  if (dim < 1) throw ConfigError(who + ": dim must be >= 1");
  if (fixed_value && (*fixed_value < 0.0 || *fixed_value > 1.0)) {
    throw ConfigError(who + ": fixed_value must lie in [0, 1]");
  }
  if (!(mean >= 0.0 && mean <= 1.0)) throw ConfigError(who + ": mean must lie in [0, 1]");
}

void require_non_empty_batch(std::size_t n, std::string_view op) {
  if (n == 0) throw ArgumentError(std::string(op) + ": empty batch");
}

void require_same_length(std::size_t a, std::size_t b, std::string_view op) {
  if (a != b) {
    throw ArgumentError(std::string(op) + ": length mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
  }
}

std::shared_ptr<Translator> make_translator(const ProviderConfig& config) {
  config.validate();
  if (config.backend == Backend::Http) return std::make_shared<HttpProvider>(config);
  return std::make_shared<MockTranslator>();
}

std::shared_ptr<TextEmbedder> make_text_embedder(const ProviderConfig& config) {
  config.validate();
  if (config.backend == Backend::Http) return std::make_shared<HttpProvider>(config);
  return std::make_shared<MockTextEmbedder>(config.dim, config.seed);
}

std::shared_ptr<MultimodalEmbedder> make_multimodal_embedder(const ProviderConfig& config) {
  config.validate();
  std::shared_ptr<MultimodalEmbedder> base;
  if (config.backend == Backend::Http) {
    base = std::make_shared<HttpProvider>(config);
  } else {
    base = std::make_shared<MockMultimodalEmbedder>(config.dim, config.seed);
  }
  if (!config.embedding_file.empty()) {
    return std::make_shared<PrecomputedImageEmbedder>(read_embedding_file(config.embedding_file),
                                                      std::move(base));
  }
  return base;
}

std::shared_ptr<QeScorer> make_qe_scorer(const ProviderConfig& config) {
  config.validate();
  if (config.backend == Backend::Http) return std::make_shared<HttpProvider>(config);
  return std::make_shared<MockQeScorer>(config.mean, config.fixed_value, config.seed);
}

std::shared_ptr<Refiner> make_refiner(const ProviderConfig& config) {
  config.validate();
  if (config.backend == Backend::Http) return std::make_shared<HttpProvider>(config);
  return std::make_shared<MockRefiner>(config.rewrites, config.substitutions);
}

ProviderSet make_providers(const ProvidersConfig& config) {
  return {make_translator(config.translator), make_text_embedder(config.text_embedder),
          make_multimodal_embedder(config.multimodal_embedder), make_qe_scorer(config.qe_scorer),
          make_refiner(config.refiner)};
}

}  // namespace capqe
