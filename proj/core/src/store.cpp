#include "capqe/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capqe/error.hpp"
#include "capqe/hashing.hpp"

namespace capqe {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kChunkSuffix = ".records";
constexpr std::string_view kTempPrefix = ".tmp-";

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content, bool sync) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw TransientError("cannot create " + path.string());
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() &&
                  std::fflush(f) == 0 && (!sync || ::fsync(fileno(f)) == 0);
  std::fclose(f);
  if (!ok) throw TransientError("short write to " + path.string());
}

}  // namespace

void check_version_id(std::string_view version_id) {
  if (version_id.empty()) throw ArgumentError("empty version id");
  for (char c : version_id) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    c == '_' || c == '-';
    if (!ok) throw ArgumentError("invalid version id '" + std::string(version_id) + "'");
  }
}

// MemoryStore

bool MemoryStore::version_exists(std::string_view version_id) const {
  std::lock_guard lock(mu_);
  return versions_.find(version_id) != versions_.end();
}

PublishOutcome MemoryStore::publish(std::string_view version_id, std::string_view content,
                                    const std::function<void()>& mid_write) {
  check_version_id(version_id);
  {
    std::lock_guard lock(mu_);
    if (versions_.find(version_id) != versions_.end()) return PublishOutcome::AlreadyPresent;
  }
  // Staged copy is private until inserted below.
  std::string staged(content);
  if (mid_write) mid_write();
  std::lock_guard lock(mu_);
  auto [it, inserted] = versions_.emplace(std::string(version_id), std::move(staged));
  return inserted ? PublishOutcome::Published : PublishOutcome::AlreadyPresent;
}

std::optional<std::string> MemoryStore::read_version(std::string_view version_id) const {
  std::lock_guard lock(mu_);
  auto it = versions_.find(version_id);
  if (it == versions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryStore::list_versions() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, v] : versions_) out.push_back(k);
  return out;
}

void MemoryStore::write_manifest(std::string_view content) {
  std::lock_guard lock(mu_);
  manifest_ = std::string(content);
}

std::optional<std::string> MemoryStore::read_manifest() const {
  std::lock_guard lock(mu_);
  return manifest_;
}

void MemoryStore::write_overlay(CaptionId id, std::string_view content) {
  std::lock_guard lock(mu_);
  overlay_[id] = std::string(content);
}

std::optional<std::string> MemoryStore::read_overlay(CaptionId id) const {
  std::lock_guard lock(mu_);
  auto it = overlay_.find(id);
  if (it == overlay_.end()) return std::nullopt;
  return it->second;
}

std::vector<CaptionId> MemoryStore::list_overlay() const {
  std::lock_guard lock(mu_);
  std::vector<CaptionId> out;
  for (const auto& [k, v] : overlay_) out.push_back(k);
  return out;
}

std::map<std::string, std::string> MemoryStore::snapshot() const {
  std::lock_guard lock(mu_);
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : versions_) out["chunks/" + k + std::string(kChunkSuffix)] = v;
  if (manifest_) out["manifest.records"] = *manifest_;
  for (const auto& [k, v] : overlay_) out["overlay/" + std::to_string(k) + ".record"] = v;
  return out;
}

// FileStore

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "chunks", ec);
  if (!ec) fs::create_directories(root_ / "overlay", ec);
  if (ec) throw TransientError("cannot open store at " + root_.string() + ": " + ec.message());
  for (const auto* sub : {"chunks", "overlay", ""}) {
    for (const auto& entry : fs::directory_iterator(root_ / sub)) {
      if (entry.path().filename().string().starts_with(kTempPrefix)) fs::remove(entry.path(), ec);
    }
  }
}

fs::path FileStore::chunk_path(std::string_view version_id) const {
  check_version_id(version_id);
  return root_ / "chunks" / (std::string(version_id) + std::string(kChunkSuffix));
}

fs::path FileStore::temp_path(const fs::path& dir, std::string_view stem) const {
  static std::atomic<std::uint64_t> counter{0};
  return dir / (std::string(kTempPrefix) + std::string(stem) + "-" + std::to_string(::getpid()) +
                "-" + std::to_string(counter.fetch_add(1)));
}

void FileStore::replace_atomically(const fs::path& target, std::string_view content) const {
  const fs::path tmp = temp_path(target.parent_path(), target.filename().string());
  write_file(tmp, content, true);
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw TransientError("cannot replace " + target.string());
  }
}

bool FileStore::version_exists(std::string_view version_id) const {
  std::error_code ec;
  const bool exists = fs::is_regular_file(chunk_path(version_id), ec);
  if (ec && ec != std::errc::no_such_file_or_directory) {
    throw TransientError("store unreachable: " + ec.message());
  }
  return exists;
}

PublishOutcome FileStore::publish(std::string_view version_id, std::string_view content,
                                  const std::function<void()>& mid_write) {
  const fs::path target = chunk_path(version_id);
  if (version_exists(version_id)) return PublishOutcome::AlreadyPresent;

  const fs::path tmp = temp_path(target.parent_path(), version_id);
  const std::size_t half = content.size() / 2;
  write_file(tmp, content.substr(0, half), false);
  // A crash here leaves only an invisible partial temp file.
  if (mid_write) mid_write();
  {
    std::FILE* f = std::fopen(tmp.c_str(), "ab");
    if (f == nullptr) throw TransientError("cannot reopen " + tmp.string());
    const auto rest = content.substr(half);
    const bool ok = std::fwrite(rest.data(), 1, rest.size(), f) == rest.size() &&
                    std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw TransientError("short write to " + tmp.string());
  }
  const auto written = slurp(tmp);
  if (!written || sha256_hex(*written) != sha256_hex(content)) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IntegrityError("write-back verification failed for version " + std::string(version_id));
  }

  std::error_code ec;
  fs::create_hard_link(tmp, target, ec);
  std::error_code ignored;
  fs::remove(tmp, ignored);
  if (ec) {
    if (ec == std::errc::file_exists) return PublishOutcome::AlreadyPresent;
    throw TransientError("cannot publish " + std::string(version_id) + ": " + ec.message());
  }
  return PublishOutcome::Published;
}

std::optional<std::string> FileStore::read_version(std::string_view version_id) const {
  return slurp(chunk_path(version_id));
}

std::vector<std::string> FileStore::list_versions() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / "chunks")) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with(kTempPrefix) || !name.ends_with(kChunkSuffix)) continue;
    out.push_back(name.substr(0, name.size() - kChunkSuffix.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void FileStore::write_manifest(std::string_view content) {
  replace_atomically(root_ / "manifest.records", content);
}

std::optional<std::string> FileStore::read_manifest() const {
  return slurp(root_ / "manifest.records");
}

void FileStore::write_overlay(CaptionId id, std::string_view content) {
  replace_atomically(root_ / "overlay" / (std::to_string(id) + ".record"), content);
}

std::optional<std::string> FileStore::read_overlay(CaptionId id) const {
  return slurp(root_ / "overlay" / (std::to_string(id) + ".record"));
}

std::vector<CaptionId> FileStore::list_overlay() const {
  std::vector<CaptionId> out;
  for (const auto& entry : fs::directory_iterator(root_ / "overlay")) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with(kTempPrefix) || !name.ends_with(".record")) continue;
    try {
      out.push_back(std::stoll(name.substr(0, name.size() - 7)));
    } catch (const std::exception&) {
      continue;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, std::string> FileStore::snapshot() const {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with(kTempPrefix)) continue;
    out[fs::relative(entry.path(), root_).generic_string()] = *slurp(entry.path());
  }
  return out;
}

}  // namespace capqe
