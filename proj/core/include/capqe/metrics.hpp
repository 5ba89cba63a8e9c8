#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capqe {

struct SegmentPair {
  std::string hypothesis;
  std::string reference;
};

// Standard: whitespace split after isolating every punctuation code point
// (see utf8::is_punctuation) as its own token. Whitespace: plain whitespace
// split. Both operate on code points.
enum class TokenizerId { Standard, Whitespace };

TokenizerId parse_tokenizer(std::string_view name);
std::string_view to_string(TokenizerId id);

std::vector<std::u32string> tokenize(std::string_view text, TokenizerId tokenizer);

struct BleuOptions {
  int max_n{4};
  TokenizerId tokenizer{TokenizerId::Standard};
  // Add-one smoothing of orders n >= 2, for tiny fixtures.
  bool add_one_smoothing{false};
};

// Corpus-level sufficient statistics.
struct BleuStats {
  std::vector<std::uint64_t> matches;  // clipped n-gram matches per order
  std::vector<std::uint64_t> totals;   // hypothesis n-grams per order
  std::uint64_t hyp_length{0};
  std::uint64_t ref_length{0};
};

BleuStats collect_bleu_stats(std::span<const SegmentPair> pairs, const BleuOptions& options);
double bleu_from_stats(const BleuStats& stats, const BleuOptions& options);

// Corpus BLEU in [0, 1]: geometric mean of clipped n-gram precisions times
// the brevity penalty. Orders with no hypothesis n-grams anywhere in the
// corpus are left out of the mean; any order with zero matches gives 0.
double corpus_bleu(std::span<const SegmentPair> pairs, const BleuOptions& options = {});

// corpus_bleu on the 0-100 scale.
double sacrebleu_style(std::span<const SegmentPair> pairs, const BleuOptions& options = {});

// Character n-gram F-beta on the 0-100 scale. Whitespace is removed before
// n-gram extraction; n-gram statistics are summed over the corpus, precision
// and recall are averaged over orders 1..char_n, then combined.
double chrf(std::span<const SegmentPair> pairs, int char_n = 6, double beta = 2.0);

struct MetricReport {
  double bleu{0.0};
  double sacrebleu_style{0.0};
  double chrf{0.0};
  std::size_t n_segments{0};
};

MetricReport compute_report(std::span<const SegmentPair> pairs,
                            TokenizerId tokenizer = TokenizerId::Standard);

// Line-aligned UTF-8 files, one segment per line. Throws AlignmentError when
// the line counts differ.
MetricReport evaluate_dataset(const std::filesystem::path& hyp_file,
                              const std::filesystem::path& ref_file,
                              TokenizerId tokenizer = TokenizerId::Standard);

std::vector<std::string> read_segments(const std::filesystem::path& path);

std::string serialize_metric_report(const MetricReport& report);

}  // namespace capqe
