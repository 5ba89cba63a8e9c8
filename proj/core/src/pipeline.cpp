#include "capqe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "capqe/caption_scorer.hpp"
#include "capqe/error.hpp"
#include "capqe/hashing.hpp"
#include "capqe/records.hpp"
#include "capqe/status.hpp"
#include "json_codec.hpp"

namespace capqe {

using detail::json;

std::string make_version_id(std::int64_t start, std::int64_t end, std::string_view config_hash) {
  const std::string key =
      std::to_string(start) + ":" + std::to_string(end) + ":" + std::string(config_hash);
  return sha256_hex(key).substr(0, 16);
}

std::vector<ChunkRange> plan_chunks(std::int64_t n_records, std::int64_t chunk_size,
                                    std::string_view config_hash) {
  if (n_records < 1) throw ArgumentError("plan_chunks: n_records must be >= 1");
  if (chunk_size < 1) throw ArgumentError("plan_chunks: chunk_size must be >= 1");
  std::vector<ChunkRange> out;
  for (std::int64_t start = 0; start < n_records; start += chunk_size) {
    const std::int64_t end = std::min(n_records, start + chunk_size);
    out.push_back({start, end, make_version_id(start, end, config_hash)});
  }
  return out;
}

ChunkResult process_chunk(const ChunkRange& range, const Corpus& corpus,
                          const ProviderSet& providers, const QEConfig& config) {
  const auto& captions = corpus.captions();
  if (range.start < 0 || range.start >= range.end ||
      range.end > static_cast<std::int64_t>(captions.size())) {
    throw ArgumentError("chunk [" + std::to_string(range.start) + ", " +
                        std::to_string(range.end) + ") is outside the corpus of " +
                        std::to_string(captions.size()) + " captions");
  }
  const auto first = captions.begin() + range.start;
  const auto last = captions.begin() + range.end;

  std::vector<std::string> sources;
  std::vector<std::string> refs;
  for (auto it = first; it != last; ++it) {
    sources.push_back(it->source_text);
    refs.push_back(corpus.image_ref_for(*it));
  }
  const auto translations = providers.translator->translate(sources, Direction::SourceToTarget);
  if (translations.size() != sources.size()) {
    throw ProviderError("translator returned a short batch");
  }
  const auto scored = score_translations(sources, translations, refs, providers, config);

  ChunkResult result;
  result.range = range;
  double hybrid_sum = 0.0;
  std::size_t i = 0;
  for (auto it = first; it != last; ++it, ++i) {
    CaptionRecord rec = *it;
    rec.translated_text = translations[i];
    rec = advance(std::move(rec), CaptionStatus::Translated);
    rec.back_translated_text = scored[i].back_translation;
    rec.scores = scored[i].scores;
    rec = advance(std::move(rec), CaptionStatus::Scored);
    const bool flagged = flag_low_quality(*rec.scores, config);
    rec = advance(std::move(rec),
                  flagged ? CaptionStatus::NeedsRefinement : CaptionStatus::AcceptedAuto);
    hybrid_sum += rec.scores->hybrid;
    if (flagged) ++result.stats.flagged;
    result.records.push_back(std::move(rec));
  }
  result.stats.count = result.records.size();
  result.stats.mean_hybrid = hybrid_sum / static_cast<double>(result.stats.count);
  result.checksum = sha256_hex(serialize_records(result.records));
  return result;
}

bool version_exists(const VersionedStore& store, std::string_view version_id) {
  return store.version_exists(version_id);
}

PublishOutcome publish_chunk(VersionedStore& store, const ChunkResult& result,
                             const std::function<void()>& mid_write) {
  const std::string content = serialize_records(result.records);
  if (sha256_hex(content) != result.checksum) {
    throw IntegrityError("chunk " + result.range.version_id +
                         ": serialized content does not match its checksum");
  }
  return store.publish(result.range.version_id, content, mid_write);
}

std::string serialize_manifest(const Manifest& manifest) {
  std::string out = json{{"kind", "manifest"},
                         {"pipeline_config_hash", manifest.pipeline_config_hash},
                         {"total_records", manifest.total_records},
                         {"complete", manifest.complete},
                         {"n_chunks", manifest.chunks.size()}}
                        .dump();
  out += '\n';
  for (const auto& c : manifest.chunks) {
    out += json{{"kind", "chunk"},
                {"start", c.range.start},
                {"end", c.range.end},
                {"version_id", c.range.version_id},
                {"checksum", c.checksum},
                {"published_at", c.published_at}}
               .dump();
    out += '\n';
  }
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  bool header = false;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const json j = json::parse(lines[i]);
      const auto kind = detail::required<std::string>(j, "kind");
      if (kind == "manifest") {
        m.pipeline_config_hash = detail::required<std::string>(j, "pipeline_config_hash");
        m.total_records = detail::required<std::int64_t>(j, "total_records");
        m.complete = detail::required<bool>(j, "complete");
        header = true;
      } else if (kind == "chunk") {
        ManifestEntry e;
        e.range.start = detail::required<std::int64_t>(j, "start");
        e.range.end = detail::required<std::int64_t>(j, "end");
        e.range.version_id = detail::required<std::string>(j, "version_id");
        e.checksum = detail::required<std::string>(j, "checksum");
        e.published_at = detail::required<std::int64_t>(j, "published_at");
        m.chunks.push_back(std::move(e));
      } else {
        throw ParseError("manifest", i + 1, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("manifest", i + 1, e.what());
    }
  }
  if (!header) throw ParseError("manifest", 1, "missing manifest header record");
  return m;
}

void check_exact_cover(const Manifest& manifest) {
  auto chunks = manifest.chunks;
  std::sort(chunks.begin(), chunks.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return a.range.start < b.range.start;
  });
  std::set<std::string> ids;
  std::int64_t cursor = 0;
  for (const auto& c : chunks) {
    if (c.range.start >= c.range.end) {
      throw IntegrityError("manifest chunk " + c.range.version_id + " has an empty range");
    }
    if (!ids.insert(c.range.version_id).second) {
      throw IntegrityError("manifest repeats version " + c.range.version_id);
    }
    if (c.range.start < cursor) {
      throw IntegrityError("manifest chunks overlap at " + std::to_string(c.range.start));
    }
    if (manifest.complete && c.range.start != cursor) {
      throw IntegrityError("manifest leaves a gap at " + std::to_string(cursor));
    }
    cursor = c.range.end;
  }
  if (manifest.complete && cursor != manifest.total_records) {
    throw IntegrityError("manifest covers [0, " + std::to_string(cursor) + ") but corpus has " +
                         std::to_string(manifest.total_records) + " records");
  }
}

namespace {

template <typename Fn>
auto with_store_retries(int retries, Fn&& fn) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransientError&) {
      if (attempt >= retries) throw;
    }
  }
}

}  // namespace

RunOutcome run_pipeline(const Corpus& corpus, const ProviderSet& providers, const QEConfig& config,
                        VersionedStore& store, const RunOptions& options) {
  if (options.workers < 1) throw ArgumentError("workers must be >= 1");
  config.validate();
  const auto n = static_cast<std::int64_t>(corpus.captions().size());
  const auto plan = plan_chunks(n, options.chunk_size, options.config_hash);

  std::vector<std::optional<std::string>> checksums(plan.size());
  std::vector<std::optional<std::string>> errors(plan.size());
  std::vector<char> skipped(plan.size(), 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto hook = [&](std::string_view point, const ChunkRange& range) {
    if (options.fault_hook) options.fault_hook(point, range);
  };

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.size()) return;
      const ChunkRange& range = plan[i];
      try {
        const bool present = with_store_retries(
            options.store_retries, [&] { return store.version_exists(range.version_id); });
        if (present) {
          const auto content = with_store_retries(
              options.store_retries, [&] { return store.read_version(range.version_id); });
          if (!content) throw IntegrityError("version " + range.version_id + " vanished");
          checksums[i] = sha256_hex(*content);
          skipped[i] = 1;
          continue;
        }
        const ChunkResult result = process_chunk(range, corpus, providers, config);
        hook("before_publish", range);
        with_store_retries(options.store_retries, [&] {
          return publish_chunk(store, result, [&] { hook("mid_publish", range); });
        });
        hook("after_publish", range);
        checksums[i] = result.checksum;
      } catch (const Error& e) {
        errors[i] = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        abort.store(true);
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(options.workers), plan.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  RunOutcome outcome;
  outcome.manifest.pipeline_config_hash = options.config_hash;
  outcome.manifest.total_records = n;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (checksums[i]) {
      outcome.manifest.chunks.push_back(
          {plan[i], *checksums[i], static_cast<std::int64_t>(i)});
      if (skipped[i]) {
        ++outcome.skipped;
      } else {
        ++outcome.processed;
      }
    } else {
      outcome.failures.push_back({plan[i], errors[i].value_or("not processed")});
    }
  }
  outcome.manifest.complete = outcome.failures.empty();
  check_exact_cover(outcome.manifest);
  with_store_retries(options.store_retries,
                     [&] { store.write_manifest(serialize_manifest(outcome.manifest)); });
  return outcome;
}

}  // namespace capqe
