#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capqe/caption_scorer.hpp"
#include "capqe/corpus.hpp"
#include "capqe/providers.hpp"
#include "capqe/qe.hpp"
#include "capqe/repository.hpp"
#include "capqe/store.hpp"

namespace capqe {

struct ReviewItem {
  CaptionId caption_id{};
  std::string image_file_ref;
  std::string source_text;
  std::string current_translation;
  std::string back_translation;
  QEComponentScores scores;
  std::uint64_t revision{0};

  bool operator==(const ReviewItem&) const = default;
};

struct ReviewStats {
  std::map<CaptionStatus, std::size_t> counts;  // every status, zeros included
  std::size_t total{0};
};

// Manual-review queue over the effective records of a store. Mutations are a
// compare-and-swap on the caption revision, so concurrent decisions on one
// caption apply exactly once; the loser gets ConflictError.
class ReviewService {
 public:
  ReviewService(std::shared_ptr<VersionedStore> store, Corpus corpus, ProviderSet providers,
                QEConfig config);

  // NeedsManualReview captions in ascending caption_id; `page` is 0-based.
  // Throws ValidationError when page_size is 0.
  std::vector<ReviewItem> list_queue(std::size_t page, std::size_t page_size) const;
  std::size_t queue_size() const;

  // Scores `edited_text` as a translation of the caption without persisting
  // anything. Throws ValidationError (empty text), NotFoundError, ProviderError.
  ScoredTranslation rescore(CaptionId id, const std::string& edited_text) const;

  // Throw ValidationError, NotFoundError, ConflictError (stale revision) or
  // InvalidStateError (caption not awaiting review).
  CaptionRecord accept(CaptionId id, const std::string& edited_text,
                       std::uint64_t expected_revision);
  CaptionRecord reject(CaptionId id, std::uint64_t expected_revision);

  CaptionRecord get(CaptionId id) const;
  ReviewItem item(const CaptionRecord& record) const;
  ReviewStats stats() const;

  const QEConfig& qe_config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }

 private:
  CaptionRecord checked(CaptionId id, std::uint64_t expected_revision) const;

  CaptionRepository repo_;
  Corpus corpus_;
  ProviderSet providers_;
  QEConfig config_;
};

}  // namespace capqe
