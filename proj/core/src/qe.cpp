#include "capqe/qe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capqe/error.hpp"

namespace capqe {

namespace {

constexpr double kWeightTolerance = 1e-12;

void check_weights(const ComponentValues& w, std::vector<std::string>& errors) {
  if (w.comet < 0 || w.bert < 0 || w.clip < 0) errors.push_back("weights must be non-negative");
  const double sum = w.comet + w.bert + w.clip;
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os << "weights sum " << sum << " (must be 1)";
    errors.push_back(os.str());
  }
}

void check_bounds(const char* name, ComponentBounds b, std::vector<std::string>& errors) {
  if (!(b.min < b.max)) {
    std::ostringstream os;
    os << name << " bounds degenerate: min " << b.min << " >= max " << b.max;
    errors.push_back(os.str());
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void QEConfig::validate() const {
  std::vector<std::string> errors;
  check_weights(weights, errors);
  if (!(threshold > 0.0 && threshold < 1.0)) errors.push_back("threshold must lie in (0, 1)");
  if (!(epsilon > 0.0)) errors.push_back("epsilon must be > 0");
  check_bounds("comet", comet_bounds, errors);
  check_bounds("bert", bert_bounds, errors);
  check_bounds("clip", clip_bounds, errors);
  if (!errors.empty()) throw ConfigError(join(errors));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() == 0 || a.dim() != b.dim()) {
    throw ArgumentError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine: zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double harmonic_mean(double a, double b) {
  const double s = a + b;
  return s == 0.0 ? 0.0 : 2.0 * a * b / s;
}

double clip_grounding_score(double s_orig, double s_bt, double epsilon) {
  const double pos = std::max(s_bt, 0.0);
  if (pos == 0.0) return 0.0;
  const double ratio = s_bt / std::max(s_orig, epsilon);
  return std::min(1.0, 2.5 * pos * harmonic_mean(1.0, ratio));
}

FScore bt_semantic_fscore(const TokenEmbeddingSequence& candidate,
                          const TokenEmbeddingSequence& reference) {
  if (candidate.empty() || reference.empty()) {
    throw ArgumentError("bt_semantic_fscore: empty token sequence");
  }
  const std::size_t nc = candidate.size();
  const std::size_t nr = reference.size();
  std::vector<double> sim(nc * nr);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nr; ++j) sim[i * nr + j] = cosine(candidate[i], reference[j]);
  }
  double p = 0.0;
  for (std::size_t i = 0; i < nc; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nr; ++j) best = std::max(best, sim[i * nr + j]);
    p += best;
  }
  double r = 0.0;
  for (std::size_t j = 0; j < nr; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nc; ++i) best = std::max(best, sim[i * nr + j]);
    r += best;
  }
  FScore out;
  out.precision = p / static_cast<double>(nc);
  out.recall = r / static_cast<double>(nr);
  const double denom = out.precision + out.recall;
  out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

double normalize_component(double raw, ComponentBounds bounds) {
  if (!(bounds.min < bounds.max)) {
    std::ostringstream os;
    os << "degenerate normalization bounds (" << bounds.min << ", " << bounds.max << ")";
    throw ConfigError(os.str());
  }
  return std::clamp((raw - bounds.min) / (bounds.max - bounds.min), 0.0, 1.0);
}

double hybrid_score(const ComponentValues& normalized, const ComponentValues& weights) {
  std::vector<std::string> errors;
  check_weights(weights, errors);
  if (!errors.empty()) throw ConfigError(join(errors));
  const double sum = weights.comet * normalized.comet + weights.bert * normalized.bert +
                    weights.clip * normalized.clip;
  return std::clamp(sum, 0.0, 1.0);
}

bool flag_low_quality(const QEComponentScores& scores, const QEConfig& config) {
  return scores.hybrid < config.threshold;
}

ComponentFlags component_flags(const QEComponentScores& scores, const QEConfig& config) {
  return {scores.normalized.comet < config.component_thresholds.comet,
          scores.normalized.bert < config.component_thresholds.bert,
          scores.normalized.clip < config.component_thresholds.clip};
}

QEComponentScores assemble_scores(double comet_raw, double bert_f1, double s_orig, double s_bt,
                                  const QEConfig& config) {
  QEComponentScores s;
  s.comet_raw = comet_raw;
  s.bert_raw = bert_f1;
  s.s_orig = s_orig;
  s.s_bt = s_bt;
  s.clip_raw = clip_grounding_score(s_orig, s_bt, config.epsilon);
  s.normalized.comet = normalize_component(comet_raw, config.comet_bounds);
  s.normalized.bert = normalize_component(bert_f1, config.bert_bounds);
  s.normalized.clip = normalize_component(s.clip_raw, config.clip_bounds);
  s.hybrid = hybrid_score(s.normalized, config.weights);
  return s;
}

}  // namespace capqe
