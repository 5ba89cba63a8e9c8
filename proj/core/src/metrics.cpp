#include "capqe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "capqe/error.hpp"
#include "capqe/records.hpp"
#include "capqe/utf8.hpp"
#include "json_codec.hpp"

namespace capqe {

namespace {

using NgramCounts = std::unordered_map<std::u32string, std::uint64_t>;

// n-grams over token ids; each id is packed into one char32_t so the key is a
// plain u32string.
NgramCounts count_ngrams(const std::vector<char32_t>& ids, int n) {
  NgramCounts counts;
  if (static_cast<int>(ids.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= ids.size(); ++i) {
    ++counts[std::u32string(ids.begin() + i, ids.begin() + i + n)];
  }
  return counts;
}

NgramCounts count_char_ngrams(const std::u32string& chars, int n) {
  NgramCounts counts;
  if (static_cast<int>(chars.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[chars.substr(i, n)];
  return counts;
}

std::uint64_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  std::uint64_t m = 0;
  for (const auto& [gram, c] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

std::uint64_t total(const NgramCounts& counts) {
  std::uint64_t t = 0;
  for (const auto& [gram, c] : counts) t += c;
  return t;
}

}  // namespace

TokenizerId parse_tokenizer(std::string_view name) {
  if (name == "standard") return TokenizerId::Standard;
  if (name == "whitespace") return TokenizerId::Whitespace;
  throw ArgumentError("unknown tokenizer '" + std::string(name) +
                      "' (expected standard|whitespace)");
}

std::string_view to_string(TokenizerId id) {
  return id == TokenizerId::Standard ? "standard" : "whitespace";
}

std::vector<std::u32string> tokenize(std::string_view text, TokenizerId tokenizer) {
  std::vector<std::u32string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_whitespace(c)) {
      flush();
    } else if (tokenizer == TokenizerId::Standard && utf8::is_punctuation(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

BleuStats collect_bleu_stats(std::span<const SegmentPair> pairs, const BleuOptions& options) {
  if (options.max_n < 1) throw ArgumentError("max_n must be >= 1");
  BleuStats stats;
  stats.matches.assign(options.max_n, 0);
  stats.totals.assign(options.max_n, 0);
  for (const auto& pair : pairs) {
    const auto hyp = tokenize(pair.hypothesis, options.tokenizer);
    const auto ref = tokenize(pair.reference, options.tokenizer);
    std::unordered_map<std::u32string, char32_t> vocab;
    auto to_ids = [&](const std::vector<std::u32string>& toks) {
      std::vector<char32_t> ids;
      ids.reserve(toks.size());
      for (const auto& t : toks) {
        auto [it, _] = vocab.emplace(t, static_cast<char32_t>(vocab.size() + 1));
        ids.push_back(it->second);
      }
      return ids;
    };
    const auto hyp_ids = to_ids(hyp);
    const auto ref_ids = to_ids(ref);
    stats.hyp_length += hyp_ids.size();
    stats.ref_length += ref_ids.size();
    for (int n = 1; n <= options.max_n; ++n) {
      const auto h = count_ngrams(hyp_ids, n);
      const auto r = count_ngrams(ref_ids, n);
      stats.matches[n - 1] += clipped_matches(h, r);
      stats.totals[n - 1] += total(h);
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats, const BleuOptions& options) {
  if (stats.hyp_length == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= options.max_n; ++n) {
    double m = static_cast<double>(stats.matches[n - 1]);
    double t = static_cast<double>(stats.totals[n - 1]);
    if (stats.totals[n - 1] == 0) continue;
    if (options.add_one_smoothing && n >= 2) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0) return 0.0;
    log_sum += std::log(m / t);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double c = static_cast<double>(stats.hyp_length);
  const double r = static_cast<double>(stats.ref_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / orders);
}

double corpus_bleu(std::span<const SegmentPair> pairs, const BleuOptions& options) {
  if (pairs.empty()) throw ArgumentError("corpus_bleu: no segments");
  return bleu_from_stats(collect_bleu_stats(pairs, options), options);
}

double sacrebleu_style(std::span<const SegmentPair> pairs, const BleuOptions& options) {
  return 100.0 * corpus_bleu(pairs, options);
}

double chrf(std::span<const SegmentPair> pairs, int char_n, double beta) {
  if (char_n < 1) throw ArgumentError("char_n must be >= 1");
  if (pairs.empty()) throw ArgumentError("chrf: no segments");
  std::vector<std::uint64_t> match(char_n, 0), hyp_total(char_n, 0), ref_total(char_n, 0);
  auto strip = [](std::string_view s) {
    std::u32string out;
    for (char32_t c : utf8::decode(s)) {
      if (!utf8::is_whitespace(c)) out.push_back(c);
    }
    return out;
  };
  for (const auto& pair : pairs) {
    const auto hyp = strip(pair.hypothesis);
    const auto ref = strip(pair.reference);
    for (int n = 1; n <= char_n; ++n) {
      const auto h = count_char_ngrams(hyp, n);
      const auto r = count_char_ngrams(ref, n);
      match[n - 1] += clipped_matches(h, r);
      hyp_total[n - 1] += total(h);
      ref_total[n - 1] += total(r);
    }
  }
  double p_sum = 0.0;
  double r_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < char_n; ++n) {
    if (hyp_total[n] == 0 && ref_total[n] == 0) continue;
    const double m = static_cast<double>(match[n]);
    p_sum += hyp_total[n] ? m / static_cast<double>(hyp_total[n]) : 0.0;
    r_sum += ref_total[n] ? m / static_cast<double>(ref_total[n]) : 0.0;
    ++orders;
  }
  // Both sides empty everywhere: identical (empty) corpora.
  if (orders == 0) return 100.0;
  const double p = p_sum / orders;
  const double r = r_sum / orders;
  const double b2 = beta * beta;
  const double denom = b2 * p + r;
  if (denom == 0.0) return 0.0;
  return 100.0 * (1.0 + b2) * p * r / denom;
}

MetricReport compute_report(std::span<const SegmentPair> pairs, TokenizerId tokenizer) {
  BleuOptions options;
  options.tokenizer = tokenizer;
  MetricReport report;
  report.bleu = corpus_bleu(pairs, options);
  report.sacrebleu_style = sacrebleu_style(pairs, options);
  report.chrf = chrf(pairs);
  report.n_segments = pairs.size();
  return report;
}

std::vector<std::string> read_segments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return split_lines(buf.str());
}

MetricReport evaluate_dataset(const std::filesystem::path& hyp_file,
                              const std::filesystem::path& ref_file, TokenizerId tokenizer) {
  const auto hyps = read_segments(hyp_file);
  const auto refs = read_segments(ref_file);
  if (hyps.size() != refs.size()) {
    throw AlignmentError("segment count mismatch: " + hyp_file.string() + " has " +
                         std::to_string(hyps.size()) + ", " + ref_file.string() + " has " +
                         std::to_string(refs.size()));
  }
  std::vector<SegmentPair> pairs;
  pairs.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) pairs.push_back({hyps[i], refs[i]});
  return compute_report(pairs, tokenizer);
}

std::string serialize_metric_report(const MetricReport& report) {
  return detail::json{{"kind", "metrics"},
                      {"bleu", report.bleu},
                      {"sacrebleu_style", report.sacrebleu_style},
                      {"chrf", report.chrf},
                      {"n_segments", report.n_segments}}
             .dump() +
         "\n";
}

}  // namespace capqe
