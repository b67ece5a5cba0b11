#include "core/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace genseg {

std::size_t ConfusionMatrix::index_of(const std::string& label) {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  const std::size_t pos = static_cast<std::size_t>(it - labels_.begin());
  if (it != labels_.end() && *it == label) return pos;

  // grow the matrix, inserting a row and column at `pos`
  const std::size_t old_c = labels_.size();
  const std::size_t new_c = old_c + 1;
  std::vector<double> grown(new_c * new_c, 0.0);
  for (std::size_t r = 0; r < old_c; ++r)
    for (std::size_t c = 0; c < old_c; ++c)
      grown[(r + (r >= pos ? 1 : 0)) * new_c + (c + (c >= pos ? 1 : 0))] =
          counts_[r * old_c + c];
  counts_ = std::move(grown);
  labels_.insert(it, label);
  return pos;
}

void ConfusionMatrix::add(const Segmentation& gt, const Segmentation& pred,
                          const LabelFilter& exclude) {
  require(gt.frames == pred.frames, "confusion: sequence lengths differ");
  gt.validate();
  pred.validate();
  for (const auto& span : gt.spans)
    if (!exclude.count(span.label)) index_of(span.label);
  for (const auto& span : pred.spans) index_of(span.label);
  auto git = gt.spans.begin();
  auto pit = pred.spans.begin();
  for (std::size_t t = 0; t < gt.frames; ++t) {
    while (t >= git->end) ++git;
    while (t >= pit->end) ++pit;
    if (exclude.count(git->label)) continue;
    const std::size_t r = index_of(git->label);
    const std::size_t c = index_of(pit->label);
    counts_[r * labels_.size() + c] += 1.0;
  }
}

double ConfusionMatrix::count(const std::string& gt_label,
                              const std::string& pred_label) const {
  const auto r = std::lower_bound(labels_.begin(), labels_.end(), gt_label);
  const auto c = std::lower_bound(labels_.begin(), labels_.end(), pred_label);
  if (r == labels_.end() || *r != gt_label || c == labels_.end() || *c != pred_label)
    return 0.0;
  return counts_[static_cast<std::size_t>(r - labels_.begin()) * labels_.size() +
                 static_cast<std::size_t>(c - labels_.begin())];
}

double ConfusionMatrix::total() const {
  double s = 0.0;
  for (double v : counts_) s += v;
  return s;
}

double ConfusionMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) s += counts_[i * labels_.size() + i];
  return s;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "label";
  for (const auto& l : labels_) out += "," + l;
  out += "\n";
  char buf[48];
  for (std::size_t r = 0; r < labels_.size(); ++r) {
    out += labels_[r];
    for (std::size_t c = 0; c < labels_.size(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", counts_[r * labels_.size() + c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

double frame_accuracy(const Segmentation& gt, const Segmentation& pred,
                      const LabelFilter& exclude) {
  require(gt.frames == pred.frames, "frame_accuracy: sequence lengths differ");
  gt.validate();
  pred.validate();
  std::size_t correct = 0, counted = 0;
  auto git = gt.spans.begin();
  auto pit = pred.spans.begin();
  for (std::size_t t = 0; t < gt.frames; ++t) {
    while (t >= git->end) ++git;
    while (t >= pit->end) ++pit;
    if (!exclude.empty() && exclude.count(git->label)) continue;
    ++counted;
    if (git->label == pit->label) ++correct;
  }
  require(counted > 0, "frame_accuracy: every frame is excluded");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

double class_mean_accuracy(const ConfusionMatrix& cm) {
  const std::size_t c_count = cm.labels_.size();
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < c_count; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) row += cm.counts_[r * c_count + c];
    if (row <= 0.0) continue;
    sum += cm.counts_[r * c_count + r] / row;
    ++used;
  }
  require(used > 0, "class_mean_accuracy: no ground-truth frames");
  return sum / static_cast<double>(used);
}

void midpoint_hit_counts(const Segmentation& gt, const Segmentation& pred,
                         std::size_t& hits, std::size_t& total,
                         const LabelFilter& exclude) {
  require(gt.frames == pred.frames, "midpoint_hit: sequence lengths differ");
  gt.validate();
  pred.validate();
  std::vector<bool> matched(gt.spans.size(), false);
  hits = 0;
  total = 0;
  for (const auto& g : gt.spans)
    if (!exclude.count(g.label)) ++total;
  for (const auto& p : pred.spans) {
    if (exclude.count(p.label)) continue;
    const std::size_t mid = (p.start + p.end - 1) / 2;
    for (std::size_t g = 0; g < gt.spans.size(); ++g) {
      if (matched[g] || gt.spans[g].label != p.label) continue;
      if (mid >= gt.spans[g].start && mid < gt.spans[g].end) {
        matched[g] = true;
        ++hits;
        break;
      }
    }
  }
}

double midpoint_hit_accuracy(const Segmentation& gt, const Segmentation& pred) {
  std::size_t hits = 0, total = 0;
  midpoint_hit_counts(gt, pred, hits, total);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double activity_accuracy(const std::vector<std::string>& gt,
                         const std::vector<std::string>& pred) {
  require(gt.size() == pred.size(), "activity_accuracy: list lengths differ");
  require(!gt.empty(), "activity_accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] == pred[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(gt.size());
}

}  // namespace genseg
