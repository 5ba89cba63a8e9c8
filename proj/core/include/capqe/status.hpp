#pragma once

#include "capqe/types.hpp"

namespace capqe {

// Caption lifecycle:
//   Pending -> Translated -> Scored -> {AcceptedAuto | NeedsRefinement}
//   NeedsRefinement -> {RefinedAuto | NeedsManualReview}
//   RefinedAuto -> Scored
//   NeedsManualReview -> {AcceptedManual | Rejected}
bool validate_status_transition(CaptionStatus from, CaptionStatus to);

// True for every status at or past Translated / Scored in the lifecycle.
bool requires_translation(CaptionStatus status);
bool requires_scores(CaptionStatus status);

// Builds the successor of `record` in state `to`. `record` carries whatever
// field edits go with the move; its status is still the old one. Throws
// InvalidStateError on an illegal edge or when the successor would violate a
// field invariant. The successor's revision is record.revision + 1.
CaptionRecord advance(CaptionRecord record, CaptionStatus to);

}  // namespace capqe
