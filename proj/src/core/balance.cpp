#include "core/balance.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace genseg {

Matrix resample_frames(const Matrix& frames, std::size_t target_len) {
  require(frames.rows() >= 1 && target_len >= 1, "resample_frames: empty input");
  if (frames.rows() == target_len) return frames;
  const std::size_t src_len = frames.rows();
  Matrix out(target_len, frames.cols());
  for (std::size_t t = 0; t < target_len; ++t) {
    std::size_t src;
    if (target_len == 1) {
      src = 0;
    } else {
      const double pos = static_cast<double>(t) * static_cast<double>(src_len - 1) /
                         static_cast<double>(target_len - 1);
      src = static_cast<std::size_t>(std::lround(pos));
    }
    auto from = frames.row(src);
    std::copy(from.begin(), from.end(), out.row(t).data());
  }
  return out;
}

LabeledSegment synthesize_segment(const LabeledSegment& first, const LabeledSegment& second,
                                  double lambda) {
  require(first.frames.cols() == second.frames.cols(),
          "synthesize_segment: dimension mismatch");
  const std::size_t target = std::max(first.frames.rows(), second.frames.rows());
  const Matrix a = resample_frames(first.frames, target);
  const Matrix b = resample_frames(second.frames, target);
  LabeledSegment out;
  out.label = first.label;
  out.synthetic = true;
  out.frames = Matrix(target, a.cols());
  for (std::size_t i = 0; i < out.frames.storage().size(); ++i)
    out.frames.storage()[i] = (1.0 - lambda) * a.storage()[i] + lambda * b.storage()[i];
  return out;
}

SegmentsByLabel balance_classes(const SegmentsByLabel& segments, std::size_t min_n,
                                std::size_t max_n, std::uint64_t seed) {
  require(min_n <= max_n, "balance_classes: min_n must not exceed max_n");
  for (const auto& [label, segs] : segments)
    if (segs.empty()) fail_invalid("balance_classes: class '" + label + "' is empty");

  SegmentsByLabel out;
  for (const auto& [label, segs] : segments) {
    Rng rng(mix_seed(seed, hash64(label)));
    std::vector<LabeledSegment> cls = segs;
    if (cls.size() > max_n) {
      const auto keep = rng.sample_without_replacement(cls.size(), max_n);
      auto sorted = keep;
      std::sort(sorted.begin(), sorted.end());
      std::vector<LabeledSegment> kept;
      kept.reserve(max_n);
      for (std::size_t i : sorted) kept.push_back(std::move(cls[i]));
      cls = std::move(kept);
    }
    const std::size_t n_real = cls.size();
    while (cls.size() < min_n) {
      const std::size_t i = static_cast<std::size_t>(rng.below(n_real));
      const std::size_t j = static_cast<std::size_t>(rng.below(n_real));
      const double lambda = rng.uniform01();
      cls.push_back(synthesize_segment(cls[i], cls[j], lambda));
    }
    out.emplace(label, std::move(cls));
  }
  return out;
}

}  // namespace genseg
