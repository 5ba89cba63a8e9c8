#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "capqe/corpus.hpp"

namespace capqe {

// Pseudo-label under which images with an empty LabelSet are counted.
inline constexpr const char* kEmptyStratum = "\xE2\x88\x85";  // U+2205

struct LabelDistribution {
  std::int64_t full_count{0};
  std::int64_t subset_count{0};
  double full_proportion{0.0};
  double subset_proportion{0.0};
  double abs_deviation{0.0};
};

// Label proportions are count / total label occurrences, computed over the
// full corpus and over the subset.
struct DistributionReport {
  std::map<std::string, LabelDistribution> labels;
  double max_abs_deviation{0.0};
  double total_variation_distance{0.0};
};

struct SampleResult {
  std::set<ImageId> subset;
  DistributionReport report;
};

// Multi-label iterative stratification over images. Returns exactly
// round(fraction * |images|) images; deterministic in (corpus, fraction, seed).
SampleResult stratified_sample(const Corpus& corpus, double fraction, std::uint64_t seed);

DistributionReport distribution_report(const Corpus& corpus, const std::set<ImageId>& subset);

// One record per label plus a trailing summary record.
std::string serialize_distribution_report(const DistributionReport& report);

}  // namespace capqe
