#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "capqe/corpus.hpp"
#include "capqe/providers.hpp"

namespace capqe::test {

std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Every file under `root` keyed by relative path.
std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root);

// All-mock providers with default knobs.
ProviderSet mock_providers(std::uint64_t seed = 0);

// One caption per image; image i gets id i + 1 and caption id 100 * (i + 1).
Corpus corpus_from_labels(const std::vector<std::set<std::string>>& labels);

// Deterministic corpus of n_images images with captions_per_image captions
// each, drawn from a small vocabulary. Image i has id i + 1 and caption j of it
// id (i + 1) * 10 + j. Some captions repeat words of their image ref, some do not.
Corpus synthetic_corpus(int n_images, int captions_per_image, std::uint64_t seed);

// Random multi-label annotations: each image gets 0..max_per_image labels
// drawn from n_labels with Zipf-like frequencies.
std::vector<std::set<std::string>> random_labels(int n_images, int n_labels, int max_per_image,
                                                 std::uint64_t seed);

// Mean total variation distance of uniformly random k-subsets over `trials` seeds.
double random_subset_tvd(const Corpus& corpus, std::size_t k, int trials, std::uint64_t seed);

struct CallLog {
  std::mutex mu;
  std::vector<std::string> forward_texts;  // every text sent source -> target
  std::atomic<int> translate_calls{0};
  std::atomic<int> embed_calls{0};
  std::atomic<int> multimodal_calls{0};
  std::atomic<int> qe_calls{0};
  std::atomic<int> refine_calls{0};
  std::vector<std::string> refined_texts;

  std::multiset<std::string> forward_set();
};

// Wraps every provider of `base`, recording calls into `log`.
ProviderSet counting(const ProviderSet& base, std::shared_ptr<CallLog> log);

// Forward translation from a fixed table (falling back to the mock), backward
// translation by the mock. Lets a test pin exact "machine" output.
class TableTranslator final : public Translator {
 public:
  explicit TableTranslator(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     Direction direction) override;

 private:
  std::map<std::string, std::string> table_;
};

// Throws ProviderError whenever a batch contains a text containing `marker`.
class PoisonedTranslator final : public Translator {
 public:
  explicit PoisonedTranslator(std::string marker) : marker_(std::move(marker)) {}
  std::vector<std::string> translate(std::span<const std::string> texts,
                                     Direction direction) override;

 private:
  std::string marker_;
};

// Refiner returning a fixed answer per input text, identity otherwise.
class TableRefiner final : public Refiner {
 public:
  explicit TableRefiner(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::vector<std::string> refine(std::span<const std::string> texts,
                                  std::string_view instructions) override;

 private:
  std::map<std::string, std::string> table_;
};

class FailingRefiner final : public Refiner {
 public:
  std::vector<std::string> refine(std::span<const std::string> texts,
                                  std::string_view instructions) override;
};

// In-process model server speaking the HTTP provider protocol, answering
// with the mock providers. `fail_next(n, status)` makes the next n requests
// return `status`.
class StubModelServer {
 public:
  StubModelServer();
  ~StubModelServer();

  std::string endpoint() const;
  void fail_next(int n, int status);
  // Replaces the JSON body of every response, for malformed-response tests.
  void override_body(std::string body);
  int requests() const { return requests_.load(); }
  int max_concurrent() const { return max_concurrent_.load(); }
  void set_delay_ms(int ms) { delay_ms_ = ms; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_concurrent_{0};
  std::atomic<int> delay_ms_{0};
};

}  // namespace capqe::test
