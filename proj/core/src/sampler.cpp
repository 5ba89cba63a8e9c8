#include "capqe/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "capqe/error.hpp"
#include "json_codec.hpp"

namespace capqe {

namespace {

// Labels as dense indices; the empty stratum gets its own index.
struct LabelIndex {
  std::vector<std::string> names;             // sorted
  std::vector<std::vector<int>> image_labels;  // per image (corpus order)
};

LabelIndex index_labels(const Corpus& corpus) {
  std::set<std::string> all;
  for (const auto& img : corpus.images()) {
    if (img.labels.empty()) {
      all.insert(kEmptyStratum);
    } else {
      all.insert(img.labels.labels.begin(), img.labels.labels.end());
    }
  }
  LabelIndex idx;
  idx.names.assign(all.begin(), all.end());
  std::map<std::string, int> pos;
  for (std::size_t i = 0; i < idx.names.size(); ++i) pos[idx.names[i]] = static_cast<int>(i);
  for (const auto& img : corpus.images()) {
    std::vector<int> ls;
    if (img.labels.empty()) {
      ls.push_back(pos[kEmptyStratum]);
    } else {
      for (const auto& l : img.labels.labels) ls.push_back(pos[l]);
    }
    idx.image_labels.push_back(std::move(ls));
  }
  return idx;
}

// Incremental label-count bookkeeping for the subset, used by the exact-size
// trim/pad step.
class SubsetCounts {
 public:
  SubsetCounts(const LabelIndex& idx, const std::vector<char>& in_subset)
      : idx_(idx), full_(idx.names.size(), 0), sub_(idx.names.size(), 0) {
    for (std::size_t i = 0; i < idx.image_labels.size(); ++i) {
      for (int l : idx.image_labels[i]) {
        ++full_[l];
        if (in_subset[i]) ++sub_[l];
      }
    }
    for (auto c : full_) full_total_ += c;
    for (auto c : sub_) sub_total_ += c;
  }

  // TVD of the subset if image `i` were added (sign=+1) or removed (sign=-1).
  double tvd_with(std::size_t i, int sign) const {
    const auto& ls = idx_.image_labels[i];
    const double sub_total = static_cast<double>(sub_total_ + sign * static_cast<long>(ls.size()));
    double sum = 0.0;
    for (std::size_t l = 0; l < full_.size(); ++l) {
      long c = sub_[l];
      if (std::find(ls.begin(), ls.end(), static_cast<int>(l)) != ls.end()) c += sign;
      const double p_full = static_cast<double>(full_[l]) / static_cast<double>(full_total_);
      const double p_sub = sub_total > 0 ? static_cast<double>(c) / sub_total : 0.0;
      sum += std::abs(p_full - p_sub);
    }
    return 0.5 * sum;
  }

  void apply(std::size_t i, int sign) {
    for (int l : idx_.image_labels[i]) sub_[l] += sign;
    sub_total_ += sign * static_cast<long>(idx_.image_labels[i].size());
  }

 private:
  const LabelIndex& idx_;
  std::vector<long> full_;
  std::vector<long> sub_;
  long full_total_{0};
  long sub_total_{0};
};

}  // namespace

SampleResult stratified_sample(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  const auto& images = corpus.images();
  const std::size_t n = images.size();
  if (n == 0) throw ArgumentError("cannot sample from an empty corpus");
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (target < 1) {
    throw ArgumentError("fraction " + std::to_string(fraction) + " of " + std::to_string(n) +
                        " images rounds to an empty subset");
  }

  const LabelIndex idx = index_labels(corpus);
  const std::size_t n_labels = idx.names.size();
  const int empty_label = [&] {
    auto it = std::find(idx.names.begin(), idx.names.end(), kEmptyStratum);
    return it == idx.names.end() ? -1 : static_cast<int>(it - idx.names.begin());
  }();

  std::vector<std::vector<std::size_t>> label_images(n_labels);
  for (std::size_t i = 0; i < n; ++i) {
    for (int l : idx.image_labels[i]) label_images[l].push_back(i);
  }

  // Two folds: 0 = subset, 1 = complement. Desired sizes and per-label
  // desired counts, decremented as images are placed.
  const double frac[2] = {fraction, 1.0 - fraction};
  double fold_desire[2] = {static_cast<double>(target), static_cast<double>(n - target)};
  std::vector<std::array<double, 2>> label_desire(n_labels);
  for (std::size_t l = 0; l < n_labels; ++l) {
    for (int f = 0; f < 2; ++f) {
      label_desire[l][f] = frac[f] * static_cast<double>(label_images[l].size());
    }
  }

  std::vector<int> fold(n, -1);
  std::vector<long> remaining(n_labels);
  for (std::size_t l = 0; l < n_labels; ++l) remaining[l] = static_cast<long>(label_images[l].size());

  auto place = [&](std::size_t i, int f) {
    fold[i] = f;
    fold_desire[f] -= 1.0;
    for (int l : idx.image_labels[i]) {
      label_desire[l][f] -= 1.0;
      --remaining[l];
    }
  };

  std::vector<char> label_done(n_labels, 0);
  if (empty_label >= 0) label_done[empty_label] = 1;  // sampled uniformly below
  while (true) {
    // Scarcest label first; ties by fewest desired, then label name.
    int pick = -1;
    for (std::size_t l = 0; l < n_labels; ++l) {
      if (label_done[l] || remaining[l] == 0) continue;
      if (pick < 0) {
        pick = static_cast<int>(l);
        continue;
      }
      const double d_l = label_desire[l][0];
      const double d_p = label_desire[pick][0];
      if (remaining[l] < remaining[pick] || (remaining[l] == remaining[pick] && d_l < d_p)) {
        pick = static_cast<int>(l);
      }
    }
    if (pick < 0) break;
    label_done[pick] = 1;
    for (std::size_t i : label_images[pick]) {
      if (fold[i] >= 0) continue;
      // Fold that wants this label most; ties go to the fold with more room,
      // then to the subset.
      const auto& d = label_desire[pick];
      int f;
      if (d[0] != d[1]) {
        f = d[0] > d[1] ? 0 : 1;
      } else {
        f = fold_desire[0] >= fold_desire[1] ? 0 : 1;
      }
      place(i, f);
    }
  }

  if (empty_label >= 0) {
    std::vector<std::size_t> pool;
    for (std::size_t i : label_images[empty_label]) {
      if (fold[i] < 0) pool.push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto take =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
    for (std::size_t k = 0; k < pool.size(); ++k) place(pool[k], k < take ? 0 : 1);
  }

  std::vector<char> in_subset(n, 0);
  std::size_t size = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fold[i] == 0) {
      in_subset[i] = 1;
      ++size;
    }
  }

  // Exact-size correction: greedily add/remove the image whose move yields the
  // smallest resulting TVD; ties by image_id (corpus order).
  SubsetCounts counts(idx, in_subset);
  while (size != target) {
    const int sign = size < target ? +1 : -1;
    std::size_t best = n;
    double best_tvd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if ((sign > 0) == static_cast<bool>(in_subset[i])) continue;
      const double tvd = counts.tvd_with(i, sign);
      if (tvd < best_tvd) {
        best_tvd = tvd;
        best = i;
      }
    }
    counts.apply(best, sign);
    in_subset[best] = sign > 0 ? 1 : 0;
    size = sign > 0 ? size + 1 : size - 1;
  }

  SampleResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_subset[i]) result.subset.insert(images[i].image_id);
  }
  result.report = distribution_report(corpus, result.subset);
  return result;
}

DistributionReport distribution_report(const Corpus& corpus, const std::set<ImageId>& subset) {
  if (subset.empty()) throw ArgumentError("subset must contain at least one image");
  for (ImageId id : subset) {
    if (corpus.find_image(id) == nullptr) {
      throw ArgumentError("subset references unknown image_id " + std::to_string(id));
    }
  }
  DistributionReport report;
  std::int64_t full_total = 0;
  std::int64_t sub_total = 0;
  for (const auto& img : corpus.images()) {
    const bool in = subset.contains(img.image_id);
    auto bump = [&](const std::string& label) {
      auto& d = report.labels[label];
      ++d.full_count;
      ++full_total;
      if (in) {
        ++d.subset_count;
        ++sub_total;
      }
    };
    if (img.labels.empty()) {
      bump(kEmptyStratum);
    } else {
      for (const auto& l : img.labels.labels) bump(l);
    }
  }
  double tvd = 0.0;
  for (auto& [label, d] : report.labels) {
    d.full_proportion = static_cast<double>(d.full_count) / static_cast<double>(full_total);
    d.subset_proportion =
        sub_total > 0 ? static_cast<double>(d.subset_count) / static_cast<double>(sub_total) : 0.0;
    d.abs_deviation = std::abs(d.full_proportion - d.subset_proportion);
    report.max_abs_deviation = std::max(report.max_abs_deviation, d.abs_deviation);
    tvd += d.abs_deviation;
  }
  report.total_variation_distance = 0.5 * tvd;
  return report;
}

std::string serialize_distribution_report(const DistributionReport& report) {
  using detail::json;
  std::string out;
  for (const auto& [label, d] : report.labels) {
    out += json{{"kind", "label"},
                {"label", label},
                {"full_count", d.full_count},
                {"subset_count", d.subset_count},
                {"full_proportion", d.full_proportion},
                {"subset_proportion", d.subset_proportion},
                {"abs_deviation", d.abs_deviation}}
               .dump();
    out += '\n';
  }
  out += json{{"kind", "summary"},
              {"max_abs_deviation", report.max_abs_deviation},
              {"total_variation_distance", report.total_variation_distance}}
             .dump();
  out += '\n';
  return out;
}

}  // namespace capqe
