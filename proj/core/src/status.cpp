#include "capqe/status.hpp"

#include "capqe/error.hpp"

namespace capqe {

std::string_view to_string(CaptionStatus status) {
  switch (status) {
    case CaptionStatus::Pending: return "Pending";
    case CaptionStatus::Translated: return "Translated";
    case CaptionStatus::Scored: return "Scored";
    case CaptionStatus::AcceptedAuto: return "AcceptedAuto";
    case CaptionStatus::NeedsRefinement: return "NeedsRefinement";
    case CaptionStatus::RefinedAuto: return "RefinedAuto";
    case CaptionStatus::NeedsManualReview: return "NeedsManualReview";
    case CaptionStatus::AcceptedManual: return "AcceptedManual";
    case CaptionStatus::Rejected: return "Rejected";
  }
  return "?";
}

CaptionStatus parse_status(std::string_view name) {
  for (CaptionStatus s : kAllStatuses) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown caption status '" + std::string(name) + "'");
}

bool validate_status_transition(CaptionStatus from, CaptionStatus to) {
  using S = CaptionStatus;
  switch (from) {
    case S::Pending: return to == S::Translated;
    case S::Translated: return to == S::Scored;
    case S::Scored: return to == S::AcceptedAuto || to == S::NeedsRefinement;
    case S::NeedsRefinement: return to == S::RefinedAuto || to == S::NeedsManualReview;
    case S::RefinedAuto: return to == S::Scored;
    case S::NeedsManualReview: return to == S::AcceptedManual || to == S::Rejected;
    case S::AcceptedAuto:
    case S::AcceptedManual:
    case S::Rejected: return false;
  }
  return false;
}

bool requires_translation(CaptionStatus status) { return status != CaptionStatus::Pending; }

bool requires_scores(CaptionStatus status) {
  return status != CaptionStatus::Pending && status != CaptionStatus::Translated;
}

CaptionRecord advance(CaptionRecord record, CaptionStatus to) {
  if (!validate_status_transition(record.status, to)) {
    throw InvalidStateError("caption " + std::to_string(record.caption_id) +
                            ": illegal transition " + std::string(to_string(record.status)) +
                            " -> " + std::string(to_string(to)));
  }
  if (requires_translation(to) && !record.translated_text) {
    throw InvalidStateError("caption " + std::to_string(record.caption_id) + ": status " +
                            std::string(to_string(to)) + " requires a translation");
  }
  if (requires_scores(to) && !record.scores) {
    throw InvalidStateError("caption " + std::to_string(record.caption_id) + ": status " +
                            std::string(to_string(to)) + " requires QE scores");
  }
  record.status = to;
  ++record.revision;
  return record;
}

}  // namespace capqe
