#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capqe/types.hpp"

namespace capqe {

enum class PublishOutcome { Published, AlreadyPresent };

// Versioned chunk storage. Published versions are immutable: publish() of an
// existing version is a no-op, and readers never observe a partial version.
// The overlay holds the latest post-pipeline revision of individual captions
// (refinement and manual review), replaced atomically per caption.
class VersionedStore {
 public:
  virtual ~VersionedStore() = default;

  virtual bool version_exists(std::string_view version_id) const = 0;
  // `mid_write` is a fault-injection point invoked once part of the content
  // has been staged but before it becomes visible.
  virtual PublishOutcome publish(std::string_view version_id, std::string_view content,
                                 const std::function<void()>& mid_write = {}) = 0;
  virtual std::optional<std::string> read_version(std::string_view version_id) const = 0;
  virtual std::vector<std::string> list_versions() const = 0;

  virtual void write_manifest(std::string_view content) = 0;
  virtual std::optional<std::string> read_manifest() const = 0;

  virtual void write_overlay(CaptionId id, std::string_view content) = 0;
  virtual std::optional<std::string> read_overlay(CaptionId id) const = 0;
  virtual std::vector<CaptionId> list_overlay() const = 0;

  // Every visible object keyed by its store-relative path.
  virtual std::map<std::string, std::string> snapshot() const = 0;
};

// Throws ArgumentError unless the id is non-empty [0-9A-Za-z_-].
void check_version_id(std::string_view version_id);

class MemoryStore final : public VersionedStore {
 public:
  bool version_exists(std::string_view version_id) const override;
  PublishOutcome publish(std::string_view version_id, std::string_view content,
                         const std::function<void()>& mid_write = {}) override;
  std::optional<std::string> read_version(std::string_view version_id) const override;
  std::vector<std::string> list_versions() const override;
  void write_manifest(std::string_view content) override;
  std::optional<std::string> read_manifest() const override;
  void write_overlay(CaptionId id, std::string_view content) override;
  std::optional<std::string> read_overlay(CaptionId id) const override;
  std::vector<CaptionId> list_overlay() const override;
  std::map<std::string, std::string> snapshot() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> versions_;
  std::optional<std::string> manifest_;
  std::map<CaptionId, std::string> overlay_;
};

// Layout under root:
//   chunks/<version_id>.records    published chunk content
//   manifest.records               run manifest
//   overlay/<caption_id>.record    latest revision of edited captions
// Publication writes a temp file, verifies it, then hard-links it into place
// (link fails if the target exists, so a version is never overwritten).
// Stale temp files from crashed writers are removed when a store is opened.
class FileStore final : public VersionedStore {
 public:
  explicit FileStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  bool version_exists(std::string_view version_id) const override;
  PublishOutcome publish(std::string_view version_id, std::string_view content,
                         const std::function<void()>& mid_write = {}) override;
  std::optional<std::string> read_version(std::string_view version_id) const override;
  std::vector<std::string> list_versions() const override;
  void write_manifest(std::string_view content) override;
  std::optional<std::string> read_manifest() const override;
  void write_overlay(CaptionId id, std::string_view content) override;
  std::optional<std::string> read_overlay(CaptionId id) const override;
  std::vector<CaptionId> list_overlay() const override;
  std::map<std::string, std::string> snapshot() const override;

 private:
  std::filesystem::path chunk_path(std::string_view version_id) const;
  std::filesystem::path temp_path(const std::filesystem::path& dir, std::string_view stem) const;
  void replace_atomically(const std::filesystem::path& target, std::string_view content) const;

  std::filesystem::path root_;
};

}  // namespace capqe
