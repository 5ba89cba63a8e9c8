#include <doctest.h>

#include <algorithm>

#include "capqe/error.hpp"
#include "capqe/mock_providers.hpp"
#include "capqe/refinement.hpp"
#include "capqe/status.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace capqe;
using namespace capqe::test;

namespace {

// Identity on the first call for a text, then the mapped answer.
class SecondTryRefiner final : public Refiner {
 public:
  explicit SecondTryRefiner(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::vector<std::string> refine(std::span<const std::string> texts, std::string_view) override {
    std::vector<std::string> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      out.push_back(seen_[t]++ > 0 && it != table_.end() ? it->second : t);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> table_;
  std::map<std::string, int> seen_;
};

struct Setup {
  Refine20 fx = load_refine20();
  QEConfig qe;
  std::vector<CaptionRecord> before;

  Setup() { before = scored_records(fx.corpus, fx.before, mock_providers(), qe); }

  ProviderSet with_refiner(std::shared_ptr<Refiner> refiner) const {
    auto p = mock_providers();
    p.refiner = std::move(refiner);
    return p;
  }
};

std::size_t count_status(const std::vector<CaptionRecord>& rs, CaptionStatus s) {
  return std::count_if(rs.begin(), rs.end(), [&](const auto& r) { return r.status == s; });
}

}  // namespace

TEST_CASE("the frozen weak translations are all flagged") {
  Setup s;
  REQUIRE(s.before.size() == 20);
  for (const auto& r : s.before) {
    INFO(r.caption_id << " hybrid " << r.scores->hybrid);
    CHECK(r.status == CaptionStatus::NeedsRefinement);
  }
}

TEST_CASE("reference translations pass the gate") {
  Setup s;
  const auto refs = scored_records(s.fx.corpus, s.fx.references, mock_providers(), s.qe);
  for (const auto& r : refs) {
    INFO(r.caption_id << " hybrid " << r.scores->hybrid);
    CHECK(r.status == CaptionStatus::AcceptedAuto);
  }
}

TEST_CASE("refiner that returns the reference is accepted on the first retry") {
  Setup s;
  auto log = std::make_shared<CallLog>();
  auto providers = counting(s.with_refiner(std::make_shared<TableRefiner>(
                                reference_refiner_table(s.fx))),
                            log);
  const auto res = refine_flagged(s.before, s.fx.corpus, providers, s.qe, {});
  CHECK(res.report.n_flagged == 20);
  CHECK(res.report.n_accepted_first_retry == 20);
  CHECK(res.report.n_auto_refined == 0);
  CHECK(res.report.n_manual_routed == 0);
  CHECK(res.report.n_provider_failed == 0);
  CHECK(log->refine_calls == 20);
  CHECK(count_status(res.records, CaptionStatus::AcceptedAuto) == 20);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.translated_text == s.fx.references.at(r.caption_id));
    CHECK(r.scores->hybrid > s.before[i].scores->hybrid);
    CHECK(r.revision == s.before[i].revision + 3);
  }
  const auto [b, a] = before_after_report(s.before, res.records, s.fx.references);
  CHECK(b.bleu < a.bleu);
  CHECK(b.chrf < a.chrf);
  CHECK(a.bleu == doctest::Approx(1.0));
}

TEST_CASE("identity refiner exhausts the budget and routes to manual review") {
  Setup s;
  auto log = std::make_shared<CallLog>();
  auto providers = counting(s.with_refiner(std::make_shared<MockRefiner>(
                                std::map<std::string, std::string>{},
                                std::map<std::string, std::string>{})),
                            log);
  RefinementConfig cfg;
  const auto res = refine_flagged(s.before, s.fx.corpus, providers, s.qe, cfg);
  CHECK(res.report.n_manual_routed == 20);
  CHECK(log->refine_calls == 20 * cfg.max_iterations);
  CHECK(count_status(res.records, CaptionStatus::NeedsManualReview) == 20);
  REQUIRE(res.report.trace.size() == 20);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    // Nothing changed, so the text and scores stay put.
    CHECK(res.records[i].translated_text == s.before[i].translated_text);
    CHECK(res.records[i].scores == s.before[i].scores);
    CHECK(res.report.trace[i].iterations == cfg.max_iterations);
  }
}

TEST_CASE("the refiner is called at most max_iterations times per caption") {
  Setup s;
  for (int max_it : {1, 2, 5}) {
    auto log = std::make_shared<CallLog>();
    auto providers = counting(s.with_refiner(std::make_shared<TableRefiner>(
                                  std::map<std::string, std::string>{})),
                              log);
    RefinementConfig cfg;
    cfg.max_iterations = max_it;
    const auto res = refine_flagged(s.before, s.fx.corpus, providers, s.qe, cfg);
    CHECK(log->refine_calls == 20 * max_it);
    for (const auto& t : res.report.trace) CHECK(t.iterations <= max_it);
  }
}

TEST_CASE("a late fix counts as auto-refined") {
  Setup s;
  auto providers =
      s.with_refiner(std::make_shared<SecondTryRefiner>(reference_refiner_table(s.fx)));
  const auto res = refine_flagged(s.before, s.fx.corpus, providers, s.qe, {});
  const auto& rep = res.report;
  CHECK(rep.n_flagged == rep.n_accepted_first_retry + rep.n_auto_refined + rep.n_manual_routed +
                             rep.n_provider_failed);
  CHECK(rep.n_auto_refined == 20);
  CHECK(rep.n_accepted_first_retry == 0);
  for (const auto& t : rep.trace) CHECK(t.iterations == 2);
}

TEST_CASE("records that are not flagged are left bit-identical") {
  Setup s;
  auto mixed = s.before;
  const auto good = scored_records(s.fx.corpus, s.fx.references, mock_providers(), s.qe);
  for (std::size_t i = 0; i < mixed.size(); i += 2) mixed[i] = good[i];
  const auto res = refine_flagged(
      mixed, s.fx.corpus, s.with_refiner(std::make_shared<TableRefiner>(reference_refiner_table(s.fx))),
      s.qe, {});
  CHECK(res.report.n_flagged == 10);
  for (std::size_t i = 0; i < mixed.size(); i += 2) CHECK(res.records[i] == mixed[i]);
}

TEST_CASE("no flagged records is the identity") {
  Setup s;
  const auto good = scored_records(s.fx.corpus, s.fx.references, mock_providers(), s.qe);
  auto log = std::make_shared<CallLog>();
  const auto res = refine_flagged(good, s.fx.corpus, counting(mock_providers(), log), s.qe, {});
  CHECK(res.records == good);
  CHECK(res.report.n_flagged == 0);
  CHECK(log->refine_calls == 0);
}

TEST_CASE("refiner failure leaves records awaiting refinement") {
  Setup s;
  const auto res = refine_flagged(s.before, s.fx.corpus,
                                  s.with_refiner(std::make_shared<FailingRefiner>()), s.qe, {});
  CHECK(res.report.n_provider_failed == 20);
  CHECK(res.records == s.before);
}

TEST_CASE("above_threshold rule accepts without requiring improvement over the start") {
  Setup s;
  RefinementConfig cfg;
  cfg.accept_rule = AcceptRule::AboveThreshold;
  const auto res = refine_flagged(
      s.before, s.fx.corpus,
      s.with_refiner(std::make_shared<TableRefiner>(reference_refiner_table(s.fx))), s.qe, cfg);
  CHECK(res.report.n_accepted_first_retry == 20);
}

TEST_CASE("refinement config validation and rule names") {
  RefinementConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.max_iterations = 3;
  cfg.instructions.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(parse_accept_rule("above_threshold") == AcceptRule::AboveThreshold);
  CHECK(to_string(AcceptRule::ImprovedAndAbove) == "improved_and_above");
  CHECK_THROWS_AS(parse_accept_rule("always"), ArgumentError);
}

TEST_CASE("references parsing") {
  const auto refs = parse_references("{\"caption_id\": 5, \"text\": \"x\"}\n\n{\"caption_id\": 2, \"text\": \"y\"}\n");
  CHECK(refs.size() == 2);
  CHECK(refs.at(2) == "y");
  CHECK_THROWS_AS(parse_references("{\"caption_id\": 5, \"text\": \"x\"}\n{\"caption_id\": 5, \"text\": \"z\"}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_references("{\"caption_id\": 5}\n"), ParseError);
}

TEST_CASE("before_after_report rejects misaligned inputs") {
  Setup s;
  std::vector<CaptionRecord> fewer(s.before.begin(), s.before.end() - 1);
  CHECK_THROWS_AS(before_after_report(s.before, fewer, s.fx.references), AlignmentError);
  auto refs = s.fx.references;
  refs.erase(1001);
  CHECK_THROWS_AS(before_after_report(s.before, s.before, refs), AlignmentError);
  CHECK_THROWS_AS(before_after_report({}, {}, refs), AlignmentError);
}

TEST_CASE("refinement report serialization") {
  Setup s;
  const auto res = refine_flagged(
      s.before, s.fx.corpus,
      s.with_refiner(std::make_shared<TableRefiner>(reference_refiner_table(s.fx))), s.qe, {});
  const auto text = serialize_refinement_report(res.report);
  CHECK(text.find("\"kind\":\"refinement\"") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);
}
