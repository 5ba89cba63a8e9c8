#include <doctest.h>

#include <filesystem>
#include <thread>

#include "capqe/error.hpp"
#include "capqe/records.hpp"
#include "capqe/repository.hpp"
#include "capqe/status.hpp"
#include "capqe/store.hpp"
#include "support.hpp"

using namespace capqe;
using namespace capqe::test;
namespace fs = std::filesystem;

namespace {

struct Crash {};

void exercise_store(VersionedStore& s) {
  CHECK_FALSE(s.version_exists("v1"));
  CHECK(s.publish("v1", "first\n") == PublishOutcome::Published);
  CHECK(s.version_exists("v1"));
  CHECK(s.publish("v1", "different\n") == PublishOutcome::AlreadyPresent);
  CHECK(s.read_version("v1") == "first\n");
  CHECK_FALSE(s.read_version("v2").has_value());

  // A crash between the halves leaves nothing visible.
  CHECK_THROWS_AS(s.publish("v2", "abcdefgh\n", [] { throw Crash{}; }), Crash);
  CHECK_FALSE(s.version_exists("v2"));
  CHECK(s.publish("v2", "abcdefgh\n") == PublishOutcome::Published);
  CHECK(s.list_versions() == std::vector<std::string>{"v1", "v2"});

  CHECK_FALSE(s.read_manifest().has_value());
  s.write_manifest("m1");
  s.write_manifest("m2");
  CHECK(s.read_manifest() == "m2");

  s.write_overlay(42, "r1");
  s.write_overlay(7, "r2");
  s.write_overlay(42, "r3");
  CHECK(s.read_overlay(42) == "r3");
  CHECK(s.list_overlay() == std::vector<CaptionId>{7, 42});

  const auto snap = s.snapshot();
  CHECK(snap.size() == 5);
  CHECK(snap.at("chunks/v1.records") == "first\n");
  CHECK(snap.at("manifest.records") == "m2");
  CHECK(snap.at("overlay/42.record") == "r3");

  CHECK_THROWS_AS(s.publish("../evil", "x"), ArgumentError);
  CHECK_THROWS_AS(s.publish("", "x"), ArgumentError);
}

CaptionRecord scored(CaptionId id) {
  CaptionRecord r;
  r.caption_id = id;
  r.image_id = 1;
  r.source_text = "A cat.";
  r.translated_text = "ur_A ur_cat.";
  r = advance(r, CaptionStatus::Translated);
  r.back_translated_text = "A cat.";
  r.scores = QEComponentScores{};
  r.scores->hybrid = 0.5;
  r = advance(r, CaptionStatus::Scored);
  r = advance(r, CaptionStatus::NeedsRefinement);
  return r;
}

}  // namespace

TEST_CASE("memory store contract") {
  MemoryStore s;
  exercise_store(s);
}

TEST_CASE("file store contract") {
  TempDir dir;
  FileStore s(dir.path());
  exercise_store(s);
  CHECK(fs::exists(dir / "chunks/v1.records"));
}

TEST_CASE("file store removes stale temp files on open") {
  TempDir dir;
  {
    FileStore s(dir.path());
    CHECK_THROWS_AS(s.publish("v9", "half written content\n", [] { throw Crash{}; }), Crash);
  }
  int temps = 0;
  for (const auto& e : fs::directory_iterator(dir / "chunks")) temps += e.path().filename().string().starts_with(".tmp-");
  CHECK(temps == 1);
  FileStore reopened(dir.path());
  CHECK(fs::is_empty(dir / "chunks"));
  CHECK(reopened.snapshot().empty());
}

TEST_CASE("concurrent publishers of one version agree on a single winner") {
  TempDir dir;
  FileStore s(dir.path());
  std::atomic<int> published{0};
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < 16; ++i) {
      threads.emplace_back([&] {
        if (s.publish("race", "same bytes\n") == PublishOutcome::Published) ++published;
      });
    }
  }
  CHECK(published == 1);
  CHECK(s.read_version("race") == "same bytes\n");
  CHECK(s.list_versions().size() == 1);
}

TEST_CASE("version id validation") {
  CHECK_NOTHROW(check_version_id("abc_DEF-0123"));
  CHECK_THROWS_AS(check_version_id("a/b"), ArgumentError);
  CHECK_THROWS_AS(check_version_id("a.b"), ArgumentError);
}

TEST_CASE("repository applies overlay revisions over chunks") {
  auto store = std::make_shared<MemoryStore>();
  const std::vector<CaptionRecord> chunk = {scored(2), scored(1)};
  store->publish("c1", serialize_records(chunk));
  store->publish("c2", serialize_records(std::vector<CaptionRecord>{scored(3)}));
  CaptionRepository repo(store);
  const auto all = repo.records();
  REQUIRE(all.size() == 3);
  CHECK(all[0].caption_id == 1);
  CHECK(all[2].caption_id == 3);

  auto next = advance(*repo.find(2), CaptionStatus::NeedsManualReview);
  repo.commit(next, 3);
  CHECK(repo.find(2)->status == CaptionStatus::NeedsManualReview);
  CHECK(store->read_overlay(2).has_value());

  CaptionRepository fresh(store);
  CHECK(fresh.find(2) == next);
  CHECK_FALSE(fresh.find(99).has_value());
}

TEST_CASE("repository commit is a compare-and-swap on revision") {
  auto store = std::make_shared<MemoryStore>();
  store->publish("c1", serialize_records(std::vector<CaptionRecord>{scored(1)}));
  CaptionRepository repo(store);
  const auto base = *repo.find(1);
  const auto next = advance(base, CaptionStatus::NeedsManualReview);
  CHECK_THROWS_AS(repo.commit(next, base.revision + 1), ConflictError);
  CHECK_THROWS_AS(repo.commit(base, base.revision), IntegrityError);
  auto missing = next;
  missing.caption_id = 77;
  CHECK_THROWS_AS(repo.commit(missing, base.revision), NotFoundError);
  repo.commit(next, base.revision);
  CHECK_THROWS_AS(repo.commit(next, base.revision), ConflictError);
}

TEST_CASE("concurrent commits on one caption: exactly one wins") {
  auto store = std::make_shared<MemoryStore>();
  store->publish("c1", serialize_records(std::vector<CaptionRecord>{scored(1)}));
  CaptionRepository repo(store);
  const auto base = *repo.find(1);
  std::atomic<int> wins{0}, conflicts{0};
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < 12; ++i) {
      threads.emplace_back([&] {
        try {
          repo.commit(advance(base, CaptionStatus::NeedsManualReview), base.revision);
          ++wins;
        } catch (const ConflictError&) {
          ++conflicts;
        }
      });
    }
  }
  CHECK(wins == 1);
  CHECK(conflicts == 11);
}

TEST_CASE("repository rejects duplicate caption ids across chunks") {
  auto store = std::make_shared<MemoryStore>();
  store->publish("c1", serialize_records(std::vector<CaptionRecord>{scored(1)}));
  store->publish("c2", serialize_records(std::vector<CaptionRecord>{scored(1)}));
  CHECK_THROWS_AS(CaptionRepository{store}, IntegrityError);
}
