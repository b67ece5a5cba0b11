#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace genseg {

struct LabeledSegment {
  std::string label;
  Matrix frames;  // T x D'
  bool synthetic = false;
};

using SegmentsByLabel = std::map<std::string, std::vector<LabeledSegment>>;

// Linear time rescaling by nearest-frame resampling; endpoints map to
// endpoints.
Matrix resample_frames(const Matrix& frames, std::size_t target_len);

// One synthetic segment: both parents rescaled to the longer length, then
// the convex combination (1 - lambda) * first + lambda * second.
LabeledSegment synthesize_segment(const LabeledSegment& first, const LabeledSegment& second,
                                  double lambda);

// Enforces per-class sample counts: classes above max_n are uniformly
// subsampled; classes below min_n are topped up with synthetic samples
// built from two random same-class parents (the shorter rescaled to the
// longer's length, then a convex combination with lambda ~ U(0,1)).
// Deterministic for a fixed seed.
SegmentsByLabel balance_classes(const SegmentsByLabel& segments, std::size_t min_n,
                                std::size_t max_n, std::uint64_t seed);

}  // namespace genseg
