#include "fixtures.hpp"

#include "capqe/caption_scorer.hpp"
#include "capqe/status.hpp"
#include "support.hpp"

namespace capqe::test {

std::vector<CaptionRecord> scored_records(const Corpus& corpus,
                                          const std::map<CaptionId, std::string>& translations,
                                          const ProviderSet& providers, const QEConfig& qe) {
  std::vector<std::string> src, tgt, refs;
  for (const auto& c : corpus.captions()) {
    src.push_back(c.source_text);
    tgt.push_back(translations.at(c.caption_id));
    refs.push_back(corpus.image_ref_for(c));
  }
  const auto scored = score_translations(src, tgt, refs, providers, qe);
  std::vector<CaptionRecord> out;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    CaptionRecord r = corpus.captions()[i];
    r.translated_text = tgt[i];
    r = advance(std::move(r), CaptionStatus::Translated);
    r.back_translated_text = scored[i].back_translation;
    r.scores = scored[i].scores;
    r = advance(std::move(r), CaptionStatus::Scored);
    r = advance(std::move(r), flag_low_quality(*r.scores, qe) ? CaptionStatus::NeedsRefinement
                                                              : CaptionStatus::AcceptedAuto);
    out.push_back(std::move(r));
  }
  return out;
}

Refine20 load_refine20() {
  return {load_corpus(fixture("refine20_corpus.jsonl")),
          load_references(fixture("refine20_before.jsonl")),
          load_references(fixture("refine20_references.jsonl"))};
}

std::map<std::string, std::string> reference_refiner_table(const Refine20& fx) {
  std::map<std::string, std::string> table;
  for (const auto& [id, text] : fx.before) table[text] = fx.references.at(id);
  return table;
}

}  // namespace capqe::test
