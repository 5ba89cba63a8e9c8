#include "capqe/refinement.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "capqe/caption_scorer.hpp"
#include "capqe/error.hpp"
#include "capqe/records.hpp"
#include "capqe/status.hpp"
#include "json_codec.hpp"

namespace capqe {

using detail::json;

std::string_view to_string(AcceptRule rule) {
  switch (rule) {
    case AcceptRule::ImprovedAndAbove: return "improved_and_above";
    case AcceptRule::AboveThreshold: return "above_threshold";
  }
  return "?";
}

AcceptRule parse_accept_rule(std::string_view name) {
  if (name == "improved_and_above") return AcceptRule::ImprovedAndAbove;
  if (name == "above_threshold") return AcceptRule::AboveThreshold;
  throw ArgumentError("unknown accept rule '" + std::string(name) +
                      "' (expected improved_and_above or above_threshold)");
}

void RefinementConfig::validate() const {
  if (max_iterations < 1) {
    throw ConfigError("max_iterations must be >= 1, got " + std::to_string(max_iterations));
  }
  if (instructions.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("refinement instructions must not be empty");
  }
}

namespace {

struct Candidate {
  std::string translation;
  std::string back_translation;
  QEComponentScores scores;
};

bool accepted(const QEComponentScores& best, double hybrid_before, const QEConfig& qe,
              AcceptRule rule) {
  if (flag_low_quality(best, qe)) return false;
  return rule == AcceptRule::AboveThreshold || best.hybrid > hybrid_before;
}

}  // namespace

RefinementResult refine_flagged(std::span<const CaptionRecord> records, const Corpus& corpus,
                                const ProviderSet& providers, const QEConfig& qe_config,
                                const RefinementConfig& config) {
  config.validate();
  qe_config.validate();
  RefinementResult out;
  out.records.assign(records.begin(), records.end());

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (out.records[i].status == CaptionStatus::NeedsRefinement) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.records[a].caption_id < out.records[b].caption_id;
  });
  if (!order.empty() && !providers.refiner) throw ConfigError("no refiner provider configured");

  auto& report = out.report;
  report.n_flagged = order.size();
  for (std::size_t idx : order) {
    const CaptionRecord& original = out.records[idx];
    if (!original.translated_text || !original.scores) {
      throw InvalidStateError("caption " + std::to_string(original.caption_id) +
                              " is flagged but carries no translation or scores");
    }
    const std::string source = original.source_text;
    const std::string image_ref = corpus.image_ref_for(original);
    const double hybrid_before = original.scores->hybrid;

    Candidate best{*original.translated_text, original.back_translated_text.value_or(""),
                   *original.scores};
    RefinementTrace trace{original.caption_id, 0, hybrid_before, hybrid_before,
                          CaptionStatus::NeedsRefinement};
    bool failed = false;
    bool done = false;
    while (trace.iterations < config.max_iterations && !done) {
      ++trace.iterations;
      try {
        const std::vector<std::string> in{best.translation};
        const auto refined = providers.refiner->refine(in, config.instructions);
        if (refined.size() != 1) throw ProviderError("refiner returned a short batch");
        const std::vector<std::string> src{source};
        const std::vector<std::string> refs{image_ref};
        const auto scored = score_translations(src, refined, refs, providers, qe_config);
        const QEComponentScores& s = scored[0].scores;
        if (s.bert_raw >= best.scores.bert_raw && s.hybrid >= best.scores.hybrid) {
          best = {refined[0], scored[0].back_translation, s};
        }
      } catch (const Error&) {
        failed = true;
        break;
      }
      done = accepted(best.scores, hybrid_before, qe_config, config.accept_rule);
    }

    if (failed) {
      ++report.n_provider_failed;
      report.trace.push_back(trace);
      continue;
    }

    CaptionRecord rec = original;
    const bool changed = best.translation != *original.translated_text ||
                         best.scores != *original.scores;
    if (changed || done) {
      rec.translated_text = best.translation;
      rec.back_translated_text = best.back_translation;
      rec.scores = best.scores;
      rec = advance(std::move(rec), CaptionStatus::RefinedAuto);
      rec = advance(std::move(rec), CaptionStatus::Scored);
    }
    if (done) {
      rec = advance(std::move(rec), CaptionStatus::AcceptedAuto);
      ++(trace.iterations == 1 ? report.n_accepted_first_retry : report.n_auto_refined);
    } else {
      if (changed) rec = advance(std::move(rec), CaptionStatus::NeedsRefinement);
      rec = advance(std::move(rec), CaptionStatus::NeedsManualReview);
      ++report.n_manual_routed;
    }
    trace.hybrid_after = best.scores.hybrid;
    trace.final_status = rec.status;
    report.trace.push_back(trace);
    out.records[idx] = std::move(rec);
  }
  return out;
}

ReferenceMap parse_references(std::string_view text, std::string_view source) {
  ReferenceMap refs;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json j = json::parse(lines[i]);
      const auto id = detail::required<CaptionId>(j, "caption_id");
      auto text_value = detail::required<std::string>(j, "text");
      if (!refs.emplace(id, std::move(text_value)).second) {
        throw ParseError(std::string(source), i + 1,
                         "duplicate reference for caption " + std::to_string(id));
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string(source), i + 1, e.what());
    }
  }
  return refs;
}

ReferenceMap load_references(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open references file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_references(buf.str(), path.string());
}

namespace {

std::vector<SegmentPair> aligned_pairs(std::span<const CaptionRecord> records,
                                       const ReferenceMap& references, std::string_view side) {
  std::vector<const CaptionRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->caption_id < b->caption_id; });
  std::vector<SegmentPair> pairs;
  for (const auto* r : sorted) {
    if (!r->translated_text) {
      throw AlignmentError(std::string(side) + " caption " + std::to_string(r->caption_id) +
                           " has no translation");
    }
    auto it = references.find(r->caption_id);
    if (it == references.end()) {
      throw AlignmentError("no reference for caption " + std::to_string(r->caption_id));
    }
    pairs.push_back({*r->translated_text, it->second});
  }
  return pairs;
}

std::vector<CaptionId> sorted_ids(std::span<const CaptionRecord> records) {
  std::vector<CaptionId> ids;
  for (const auto& r : records) ids.push_back(r.caption_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

json metric_json(const MetricReport& m) {
  return json{{"bleu", m.bleu},
              {"sacrebleu_style", m.sacrebleu_style},
              {"chrf", m.chrf},
              {"n_segments", m.n_segments}};
}

}  // namespace

std::pair<MetricReport, MetricReport> before_after_report(std::span<const CaptionRecord> before,
                                                          std::span<const CaptionRecord> after,
                                                          const ReferenceMap& references,
                                                          TokenizerId tokenizer) {
  if (sorted_ids(before) != sorted_ids(after)) {
    throw AlignmentError("before has " + std::to_string(before.size()) + " captions, after has " +
                         std::to_string(after.size()) + ", and their caption ids differ");
  }
  if (before.empty()) throw AlignmentError("no captions to report on");
  const auto b = aligned_pairs(before, references, "before");
  const auto a = aligned_pairs(after, references, "after");
  return {compute_report(b, tokenizer), compute_report(a, tokenizer)};
}

std::string serialize_refinement_report(const RefinementReport& report) {
  json summary{{"kind", "refinement"},
               {"n_flagged", report.n_flagged},
               {"n_accepted_first_retry", report.n_accepted_first_retry},
               {"n_auto_refined", report.n_auto_refined},
               {"n_manual_routed", report.n_manual_routed},
               {"n_provider_failed", report.n_provider_failed}};
  if (report.before) summary["before"] = metric_json(*report.before);
  if (report.after) summary["after"] = metric_json(*report.after);
  std::string out = summary.dump() + "\n";
  for (const auto& t : report.trace) {
    out += json{{"kind", "trace"},
                {"caption_id", t.caption_id},
                {"iterations", t.iterations},
                {"hybrid_before", t.hybrid_before},
                {"hybrid_after", t.hybrid_after},
                {"final_status", std::string(to_string(t.final_status))}}
               .dump();
    out += '\n';
  }
  return out;
}

}  // namespace capqe
