#include "capqe/caption_scorer.hpp"

#include "capqe/error.hpp"

namespace capqe {

std::vector<ScoredTranslation> score_translations(std::span<const std::string> sources,
                                                  std::span<const std::string> translations,
                                                  std::span<const std::string> image_refs,
                                                  const ProviderSet& providers,
                                                  const QEConfig& config) {
  require_non_empty_batch(sources.size(), "score_translations");
  require_same_length(sources.size(), translations.size(), "score_translations");
  require_same_length(sources.size(), image_refs.size(), "score_translations");
  const std::size_t n = sources.size();

  const auto back = providers.translator->translate(translations, Direction::TargetToSource);
  if (back.size() != n) throw ProviderError("translator returned a short batch");

  const auto src_tokens = providers.text_embedder->embed_text_tokens(sources);
  const auto bt_tokens = providers.text_embedder->embed_text_tokens(back);
  if (src_tokens.size() != n || bt_tokens.size() != n) {
    throw ProviderError("text embedder returned a short batch");
  }

  std::vector<std::string> texts;
  texts.reserve(2 * n);
  texts.insert(texts.end(), sources.begin(), sources.end());
  texts.insert(texts.end(), back.begin(), back.end());
  const auto mm = providers.multimodal_embedder->embed_multimodal(image_refs, texts);
  if (mm.image_vectors.size() != n || mm.text_vectors.size() != 2 * n) {
    throw ProviderError("multimodal embedder returned a short batch");
  }

  const auto comet = providers.qe_scorer->qe_score(sources, translations);
  if (comet.size() != n) throw ProviderError("qe scorer returned a short batch");

  std::vector<ScoredTranslation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f1 = 0.0;
    double s_orig = 0.0;
    double s_bt = 0.0;
    try {
      f1 = bt_semantic_fscore(bt_tokens[i], src_tokens[i]).f1;
      s_orig = cosine(mm.image_vectors[i], mm.text_vectors[i]);
      s_bt = cosine(mm.image_vectors[i], mm.text_vectors[n + i]);
    } catch (const ArgumentError& e) {
      throw ProviderError(std::string("unusable embeddings: ") + e.what());
    }
    out.push_back({back[i], assemble_scores(comet[i], f1, s_orig, s_bt, config)});
  }
  return out;
}

}  // namespace capqe
