#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "capqe/store.hpp"

namespace capqe {

// Effective caption records of a store: published chunk content with overlay
// revisions applied on top. Mutations go through commit(), a compare-and-swap
// on the record revision.
class CaptionRepository {
 public:
  explicit CaptionRepository(std::shared_ptr<VersionedStore> store);

  void reload();

  std::vector<CaptionRecord> records() const;  // ascending caption_id
  std::optional<CaptionRecord> find(CaptionId id) const;

  // Persists `updated` iff the stored revision equals `expected_revision`.
  // Throws NotFoundError, ConflictError (stale revision), or IntegrityError
  // (updated.revision does not advance).
  CaptionRecord commit(const CaptionRecord& updated, std::uint64_t expected_revision);

  VersionedStore& store() { return *store_; }

 private:
  std::shared_ptr<VersionedStore> store_;
  mutable std::shared_mutex mu_;
  std::map<CaptionId, CaptionRecord> records_;
};

}  // namespace capqe
