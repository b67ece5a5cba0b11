#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "core/hmm.hpp"
#include "core/matrix.hpp"
#include "core/sequence_model.hpp"

namespace genseg {

using UnitHmmSet = std::map<std::string, UnitHmm>;

struct SegSpan {
  std::string label;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  double log_score = 0.0; // emissions and transitions inside the unit
};

// Labeled, contiguous, non-overlapping spans covering [0, frames).
struct Segmentation {
  std::vector<SegSpan> spans;
  double total_log_score = 0.0;
  std::size_t frames = 0;

  std::vector<std::string> labels() const;
  // Per-frame label lookup; spans must cover the queried frame.
  const std::string& label_at(std::size_t frame) const;
  void validate() const;
};

struct DecodeConfig {
  // Added once per decoded unit (log domain); negative values discourage
  // short spans.
  double insertion_penalty = 0.0;
  // Score-gap pruning per frame; infinity disables (exact search).
  double beam = std::numeric_limits<double>::infinity();
};

// Most probable unit sequence with frame-level boundaries: token passing
// over the sequence-model graph with each arc expanded into the unit's
// left-to-right HMM chain.
Segmentation decode(const Matrix& seq, const UnitHmmSet& hmms, const SequenceModel& model,
                    const DecodeConfig& config = {});

struct ActivityBundle {
  std::string name;
  const UnitHmmSet* hmms = nullptr;
  const SequenceModel* model = nullptr;
};

struct ClassifyResult {
  std::string best;
  std::size_t best_index = 0;
  std::vector<double> scores;  // aligned with the bundle list; -inf for no path
  Segmentation best_segmentation;
};

// Decodes under every activity's grammar and returns the arg-max total
// log-score. Activities with no valid path score -inf; the call fails only
// when every activity is path-less.
ClassifyResult classify_activity(const Matrix& seq, const std::vector<ActivityBundle>& bundles,
                                 const DecodeConfig& config = {}, std::uint32_t threads = 1);

}  // namespace genseg
