#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace capqe {

using ImageId = std::int64_t;
using CaptionId = std::int64_t;

// Multi-label category annotations of one image. An empty set is legal and is
// treated as its own stratum by the sampler.
struct LabelSet {
  std::set<std::string> labels;

  bool empty() const { return labels.empty(); }
  bool operator==(const LabelSet&) const = default;
};

struct ImageEntry {
  ImageId image_id{};
  std::string file_ref;
  LabelSet labels;
  std::vector<CaptionId> caption_ids;

  bool operator==(const ImageEntry&) const = default;
};

enum class CaptionStatus {
  Pending,
  Translated,
  Scored,
  AcceptedAuto,
  NeedsRefinement,
  RefinedAuto,
  NeedsManualReview,
  AcceptedManual,
  Rejected,
};

inline constexpr std::array<CaptionStatus, 9> kAllStatuses = {
    CaptionStatus::Pending,         CaptionStatus::Translated,
    CaptionStatus::Scored,          CaptionStatus::AcceptedAuto,
    CaptionStatus::NeedsRefinement, CaptionStatus::RefinedAuto,
    CaptionStatus::NeedsManualReview, CaptionStatus::AcceptedManual,
    CaptionStatus::Rejected,
};

std::string_view to_string(CaptionStatus status);
// Throws ArgumentError on unknown names.
CaptionStatus parse_status(std::string_view name);

// Component order used by every triple below: COMET-like reference-free QE,
// back-translation F-score, visual grounding.
struct ComponentValues {
  double comet{0.0};
  double bert{0.0};
  double clip{0.0};

  bool operator==(const ComponentValues&) const = default;
};

struct QEComponentScores {
  double comet_raw{0.0};
  double bert_raw{0.0};
  double clip_raw{0.0};
  double s_orig{0.0};
  double s_bt{0.0};
  ComponentValues normalized;
  double hybrid{0.0};

  bool operator==(const QEComponentScores&) const = default;
};

struct CaptionRecord {
  CaptionId caption_id{};
  ImageId image_id{};
  std::string source_text;
  std::optional<std::string> translated_text;
  std::optional<std::string> back_translated_text;
  std::optional<QEComponentScores> scores;
  CaptionStatus status{CaptionStatus::Pending};
  std::uint64_t revision{0};

  bool operator==(const CaptionRecord&) const = default;
};

}  // namespace capqe
