#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capqe/corpus.hpp"
#include "capqe/metrics.hpp"
#include "capqe/providers.hpp"
#include "capqe/qe.hpp"

namespace capqe {

enum class AcceptRule { ImprovedAndAbove, AboveThreshold };

std::string_view to_string(AcceptRule rule);
// "improved_and_above" | "above_threshold"; throws ArgumentError otherwise.
AcceptRule parse_accept_rule(std::string_view name);

inline constexpr std::string_view kDefaultRefinementInstructions =
    "Rewrite this caption translation so it reads fluently and is grammatically correct. "
    "Keep its meaning and every object, count and attribute it mentions. "
    "Reply with the revised caption only.";

struct RefinementConfig {
  int max_iterations{3};
  AcceptRule accept_rule{AcceptRule::ImprovedAndAbove};
  std::string instructions{kDefaultRefinementInstructions};

  // Throws ConfigError.
  void validate() const;
};

struct RefinementTrace {
  CaptionId caption_id{};
  int iterations{0};  // refiner calls made
  double hybrid_before{0.0};
  double hybrid_after{0.0};
  CaptionStatus final_status{CaptionStatus::NeedsRefinement};
};

// Every flagged caption lands in exactly one counter:
//   accepted on the first refinement, accepted on a later one, routed to
//   manual review after exhausting the budget, or left NeedsRefinement
//   because the refiner or scorer failed.
struct RefinementReport {
  std::size_t n_flagged{0};
  std::size_t n_accepted_first_retry{0};
  std::size_t n_auto_refined{0};
  std::size_t n_manual_routed{0};
  std::size_t n_provider_failed{0};
  std::optional<MetricReport> before;
  std::optional<MetricReport> after;
  std::vector<RefinementTrace> trace;  // ascending caption_id
};

struct RefinementResult {
  std::vector<CaptionRecord> records;  // same order and ids as the input
  RefinementReport report;
};

// Refines every NeedsRefinement record; all other records are returned
// unchanged. A candidate is discarded when its back-translation F1 or its
// hybrid score falls below the current best.
RefinementResult refine_flagged(std::span<const CaptionRecord> records, const Corpus& corpus,
                                const ProviderSet& providers, const QEConfig& qe_config,
                                const RefinementConfig& config);

// Reference translations keyed by caption id.
using ReferenceMap = std::map<CaptionId, std::string>;

// Line-delimited {"caption_id": .., "text": ..}. Duplicate ids are a ParseError.
ReferenceMap parse_references(std::string_view text, std::string_view source = "<references>");
ReferenceMap load_references(const std::filesystem::path& path);

// Metric reports over the translations of two snapshots of the same captions.
// Throws AlignmentError when the caption id sets differ, a record has no
// translation, or a reference is missing.
std::pair<MetricReport, MetricReport> before_after_report(
    std::span<const CaptionRecord> before, std::span<const CaptionRecord> after,
    const ReferenceMap& references, TokenizerId tokenizer = TokenizerId::Standard);

std::string serialize_refinement_report(const RefinementReport& report);

}  // namespace capqe
