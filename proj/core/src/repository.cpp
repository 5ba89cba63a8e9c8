#include "capqe/repository.hpp"

#include <mutex>

#include "capqe/error.hpp"
#include "capqe/pipeline.hpp"
#include "capqe/records.hpp"

namespace capqe {

CaptionRepository::CaptionRepository(std::shared_ptr<VersionedStore> store)
    : store_(std::move(store)) {
  reload();
}

void CaptionRepository::reload() {
  std::map<CaptionId, CaptionRecord> loaded;
  std::vector<std::string> versions;
  if (auto manifest_text = store_->read_manifest()) {
    for (const auto& entry : parse_manifest(*manifest_text).chunks) {
      versions.push_back(entry.range.version_id);
    }
  } else {
    versions = store_->list_versions();
  }
  for (const auto& v : versions) {
    const auto content = store_->read_version(v);
    if (!content) throw IntegrityError("manifest lists missing version " + v);
    for (auto& rec : parse_records(*content, "chunks/" + v)) {
      const CaptionId id = rec.caption_id;
      if (!loaded.emplace(id, std::move(rec)).second) {
        throw IntegrityError("caption " + std::to_string(id) + " appears in several chunks");
      }
    }
  }
  for (CaptionId id : store_->list_overlay()) {
    const auto text = store_->read_overlay(id);
    if (!text) continue;
    auto rec = parse_record(*text, "overlay/" + std::to_string(id));
    loaded[id] = std::move(rec);
  }
  std::unique_lock lock(mu_);
  records_ = std::move(loaded);
}

std::vector<CaptionRecord> CaptionRepository::records() const {
  std::shared_lock lock(mu_);
  std::vector<CaptionRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) out.push_back(rec);
  return out;
}

std::optional<CaptionRecord> CaptionRepository::find(CaptionId id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

CaptionRecord CaptionRepository::commit(const CaptionRecord& updated,
                                        std::uint64_t expected_revision) {
  std::unique_lock lock(mu_);
  auto it = records_.find(updated.caption_id);
  if (it == records_.end()) {
    throw NotFoundError("caption " + std::to_string(updated.caption_id) + " not found");
  }
  if (it->second.revision != expected_revision) {
    throw ConflictError("caption " + std::to_string(updated.caption_id) + " is at revision " +
                        std::to_string(it->second.revision) + ", expected " +
                        std::to_string(expected_revision));
  }
  if (updated.revision <= expected_revision) {
    throw IntegrityError("commit of caption " + std::to_string(updated.caption_id) +
                         " does not advance its revision");
  }
  store_->write_overlay(updated.caption_id, serialize_record(updated));
  it->second = updated;
  return updated;
}

}  // namespace capqe
