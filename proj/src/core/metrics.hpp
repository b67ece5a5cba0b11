#pragma once

#include <set>
#include <string>
#include <vector>

#include "core/decoder.hpp"

namespace genseg {

// Labels dropped from evaluation (background / garbage classes).
using LabelFilter = std::set<std::string>;

// Frame-level confusion counts; rows are ground truth, columns are
// predictions. The vocabulary grows as pairs are added. Frames whose
// ground-truth label is excluded are skipped.
class ConfusionMatrix {
public:
  void add(const Segmentation& gt, const Segmentation& pred,
           const LabelFilter& exclude = {});

  double count(const std::string& gt_label, const std::string& pred_label) const;
  const std::vector<std::string>& labels() const { return labels_; }
  double total() const;
  double trace() const;

  std::string to_csv() const;

  friend double class_mean_accuracy(const ConfusionMatrix& cm);

private:
  std::size_t index_of(const std::string& label);  // inserts when missing
  std::vector<std::string> labels_;                // sorted
  std::vector<double> counts_;                     // C x C row-major
};

// Fraction of frames whose predicted label matches the ground truth;
// frames with an excluded ground-truth label do not count either way.
double frame_accuracy(const Segmentation& gt, const Segmentation& pred,
                      const LabelFilter& exclude = {});

// Mean over ground-truth classes of diagonal / row sum; empty rows are
// excluded, and it is an error when every row is empty.
double class_mean_accuracy(const ConfusionMatrix& cm);

// A predicted span scores a hit when its midpoint frame lies inside an
// unmatched ground-truth span of the same label; predictions are matched
// left to right, each ground-truth span at most once. Returns
// hits / ground-truth span count.
double midpoint_hit_accuracy(const Segmentation& gt, const Segmentation& pred);

// Counts behind midpoint_hit_accuracy, for aggregation across sequences.
// Excluded labels contribute neither ground-truth spans nor predictions.
void midpoint_hit_counts(const Segmentation& gt, const Segmentation& pred,
                         std::size_t& hits, std::size_t& total,
                         const LabelFilter& exclude = {});

// Fraction of exact matches between two equally long label lists.
double activity_accuracy(const std::vector<std::string>& gt,
                         const std::vector<std::string>& pred);

}  // namespace genseg
