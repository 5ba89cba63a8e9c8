#pragma once

#include <map>
#include <vector>

#include "capqe/corpus.hpp"
#include "capqe/providers.hpp"
#include "capqe/qe.hpp"
#include "capqe/refinement.hpp"

namespace capqe::test {

// Records as the pipeline would leave them had the translator produced
// `translations` (caption id -> text): translated, scored, and then either
// AcceptedAuto or NeedsRefinement.
std::vector<CaptionRecord> scored_records(const Corpus& corpus,
                                          const std::map<CaptionId, std::string>& translations,
                                          const ProviderSet& providers, const QEConfig& qe);

// The frozen 20-caption refinement fixture.
struct Refine20 {
  Corpus corpus;
  ReferenceMap before;      // weak machine translations
  ReferenceMap references;  // reference translations
};
Refine20 load_refine20();

// Refiner table mapping each weak translation to its reference.
std::map<std::string, std::string> reference_refiner_table(const Refine20& fx);

}  // namespace capqe::test
