#include "capqe/review_service.hpp"

#include "capqe/error.hpp"
#include "capqe/status.hpp"

namespace capqe {

ReviewService::ReviewService(std::shared_ptr<VersionedStore> store, Corpus corpus,
                             ProviderSet providers, QEConfig config)
    : repo_(std::move(store)),
      corpus_(std::move(corpus)),
      providers_(std::move(providers)),
      config_(config) {
  config_.validate();
}

std::vector<ReviewItem> ReviewService::list_queue(std::size_t page, std::size_t page_size) const {
  if (page_size == 0) throw ValidationError("page size must be >= 1");
  std::vector<ReviewItem> out;
  std::size_t seen = 0;
  const std::size_t first = page * page_size;
  for (const auto& rec : repo_.records()) {
    if (rec.status != CaptionStatus::NeedsManualReview) continue;
    if (seen++ < first) continue;
    out.push_back(item(rec));
    if (out.size() == page_size) break;
  }
  return out;
}

std::size_t ReviewService::queue_size() const {
  std::size_t n = 0;
  for (const auto& rec : repo_.records()) {
    if (rec.status == CaptionStatus::NeedsManualReview) ++n;
  }
  return n;
}

ReviewItem ReviewService::item(const CaptionRecord& rec) const {
  ReviewItem it;
  it.caption_id = rec.caption_id;
  it.image_file_ref = corpus_.find_image(rec.image_id) ? corpus_.image_ref_for(rec) : "";
  it.source_text = rec.source_text;
  it.current_translation = rec.translated_text.value_or("");
  it.back_translation = rec.back_translated_text.value_or("");
  it.scores = rec.scores.value_or(QEComponentScores{});
  it.revision = rec.revision;
  return it;
}

CaptionRecord ReviewService::get(CaptionId id) const {
  auto rec = repo_.find(id);
  if (!rec) throw NotFoundError("caption " + std::to_string(id) + " not found");
  return *rec;
}

ScoredTranslation ReviewService::rescore(CaptionId id, const std::string& edited_text) const {
  if (edited_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ValidationError("edited text must not be empty");
  }
  const CaptionRecord rec = get(id);
  const std::vector<std::string> src{rec.source_text};
  const std::vector<std::string> tgt{edited_text};
  const std::vector<std::string> refs{corpus_.image_ref_for(rec)};
  return score_translations(src, tgt, refs, providers_, config_)[0];
}

CaptionRecord ReviewService::checked(CaptionId id, std::uint64_t expected_revision) const {
  const CaptionRecord rec = get(id);
  if (rec.revision != expected_revision) {
    throw ConflictError("caption " + std::to_string(id) + " is at revision " +
                        std::to_string(rec.revision) + ", expected " +
                        std::to_string(expected_revision) + "; reload it");
  }
  if (rec.status != CaptionStatus::NeedsManualReview) {
    throw InvalidStateError("caption " + std::to_string(id) + " is " +
                            std::string(to_string(rec.status)) + ", not awaiting review");
  }
  return rec;
}

CaptionRecord ReviewService::accept(CaptionId id, const std::string& edited_text,
                                    std::uint64_t expected_revision) {
  CaptionRecord rec = checked(id, expected_revision);
  // Scoring happens outside any lock; the commit below re-checks the revision.
  const ScoredTranslation scored = rescore(id, edited_text);
  rec.translated_text = edited_text;
  rec.back_translated_text = scored.back_translation;
  rec.scores = scored.scores;
  return repo_.commit(advance(std::move(rec), CaptionStatus::AcceptedManual), expected_revision);
}

CaptionRecord ReviewService::reject(CaptionId id, std::uint64_t expected_revision) {
  CaptionRecord rec = checked(id, expected_revision);
  return repo_.commit(advance(std::move(rec), CaptionStatus::Rejected), expected_revision);
}

ReviewStats ReviewService::stats() const {
  ReviewStats s;
  for (CaptionStatus st : kAllStatuses) s.counts[st] = 0;
  for (const auto& rec : repo_.records()) {
    ++s.counts[rec.status];
    ++s.total;
  }
  return s;
}

}  // namespace capqe
