#pragma once

#include <span>
#include <string>
#include <vector>

#include "capqe/providers.hpp"
#include "capqe/qe.hpp"

namespace capqe {

struct ScoredTranslation {
  std::string back_translation;
  QEComponentScores scores;
};

// Full QE pass over a batch of translations:
//   back-translate -> token embeddings -> F-score (back-translation vs source)
//   multimodal embeddings -> s_orig, s_bt -> visual grounding
//   reference-free QE score -> normalization -> hybrid.
// All three spans are aligned per caption. Provider errors propagate.
std::vector<ScoredTranslation> score_translations(std::span<const std::string> sources,
                                                  std::span<const std::string> translations,
                                                  std::span<const std::string> image_refs,
                                                  const ProviderSet& providers,
                                                  const QEConfig& config);

}  // namespace capqe
