#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "capqe/corpus.hpp"
#include "capqe/providers.hpp"
#include "capqe/qe.hpp"
#include "capqe/store.hpp"

namespace capqe {

// Half-open range [start, end) of the canonical caption order.
struct ChunkRange {
  std::int64_t start{0};
  std::int64_t end{0};
  std::string version_id;

  std::int64_t size() const { return end - start; }
  bool operator==(const ChunkRange&) const = default;
};

// First 16 hex chars of sha256("<start>:<end>:<config_hash>").
std::string make_version_id(std::int64_t start, std::int64_t end, std::string_view config_hash);

// ceil(n / size) disjoint ranges covering [0, n); all but the last are full.
std::vector<ChunkRange> plan_chunks(std::int64_t n_records, std::int64_t chunk_size,
                                    std::string_view config_hash = {});

struct ChunkStats {
  std::size_t count{0};
  double mean_hybrid{0.0};
  std::size_t flagged{0};
};

struct ChunkResult {
  ChunkRange range;
  std::vector<CaptionRecord> records;
  ChunkStats stats;
  std::string checksum;  // sha256 of serialize_records(records)
};

// Translates and scores every caption in `range`. Records leave as
// AcceptedAuto or NeedsRefinement. Any provider failure fails the whole chunk.
ChunkResult process_chunk(const ChunkRange& range, const Corpus& corpus,
                          const ProviderSet& providers, const QEConfig& config);

bool version_exists(const VersionedStore& store, std::string_view version_id);

// Atomic and idempotent: an already-present version is left untouched.
// Throws IntegrityError if the records no longer match result.checksum.
PublishOutcome publish_chunk(VersionedStore& store, const ChunkResult& result,
                             const std::function<void()>& mid_write = {});

struct ManifestEntry {
  ChunkRange range;
  std::string checksum;
  // Ordinal of the chunk in the plan. Wall-clock time is deliberately absent
  // so manifests are reproducible byte for byte.
  std::int64_t published_at{0};

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string pipeline_config_hash;
  std::vector<ManifestEntry> chunks;
  std::int64_t total_records{0};
  bool complete{false};

  bool operator==(const Manifest&) const = default;
};

std::string serialize_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);

// Throws IntegrityError unless ranges are pairwise disjoint, version ids are
// unique and (when complete) the ranges cover [0, total_records) exactly.
void check_exact_cover(const Manifest& manifest);

// Kill-points: "before_publish", "mid_publish", "after_publish". The hook runs
// at each point for each chunk; throwing from it simulates a crash.
using FaultHook = std::function<void(std::string_view point, const ChunkRange& range)>;

struct RunOptions {
  std::int64_t chunk_size{1000};
  int workers{1};
  std::string config_hash;
  FaultHook fault_hook;
  int store_retries{2};  // retries of transient store errors per operation
};

struct ChunkFailure {
  ChunkRange range;
  std::string error;
};

struct RunOutcome {
  Manifest manifest;
  std::vector<ChunkFailure> failures;  // ordered by range start
  std::size_t processed{0};
  std::size_t skipped{0};
};

// Processes every unpublished chunk on a pool of `workers` threads, then
// writes the manifest. Domain errors (capqe::Error) of a chunk are collected
// as failures; any other exception aborts the run and propagates.
RunOutcome run_pipeline(const Corpus& corpus, const ProviderSet& providers, const QEConfig& config,
                        VersionedStore& store, const RunOptions& options);

}  // namespace capqe
