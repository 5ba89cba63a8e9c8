#pragma once

#include <span>
#include <vector>

#include "capqe/types.hpp"

namespace capqe {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Per-token embeddings of one text; non-empty, uniform dimension.
using TokenEmbeddingSequence = std::vector<EmbeddingVector>;

struct ComponentBounds {
  double min{0.0};
  double max{1.0};
};

struct QEConfig {
  ComponentValues weights{0.4, 0.4, 0.2};
  // Refinement gate on the hybrid score; a caption is flagged when hybrid < threshold.
  double threshold{0.7};
  double epsilon{1e-8};
  ComponentBounds comet_bounds{};
  ComponentBounds bert_bounds{};
  ComponentBounds clip_bounds{};
  // Diagnostic per-component thresholds (reported, never gating).
  ComponentValues component_thresholds{0.70, 0.90, 0.70};

  // Throws ConfigError listing every violated invariant.
  void validate() const;
};

// Throws ArgumentError on dimension mismatch, empty or all-zero input.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

double harmonic_mean(double a, double b);

// Relative visual grounding of a back-translated caption:
//   min(1, 2.5 * max(s_bt, 0) * H(1, s_bt / max(s_orig, eps)))
// with H the harmonic mean. Result in [0, 1].
double clip_grounding_score(double s_orig, double s_bt, double epsilon);

struct FScore {
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
};

// Greedy token matching: precision averages, over candidate tokens, the best
// cosine to any reference token; recall is the mirror image.
FScore bt_semantic_fscore(const TokenEmbeddingSequence& candidate,
                          const TokenEmbeddingSequence& reference);

// clamp((raw - min) / (max - min), 0, 1). Throws ConfigError when min >= max.
double normalize_component(double raw, ComponentBounds bounds);

// Weighted sum of normalized components. Throws ConfigError unless the
// weights are non-negative and sum to 1 within 1e-12.
double hybrid_score(const ComponentValues& normalized, const ComponentValues& weights);

bool flag_low_quality(const QEComponentScores& scores, const QEConfig& config);

// Per-component diagnostic flags against config.component_thresholds.
struct ComponentFlags {
  bool comet{false};
  bool bert{false};
  bool clip{false};
};
ComponentFlags component_flags(const QEComponentScores& scores, const QEConfig& config);

// Assembles a full score record from the raw signals.
QEComponentScores assemble_scores(double comet_raw, double bert_f1, double s_orig, double s_bt,
                                  const QEConfig& config);

}  // namespace capqe
