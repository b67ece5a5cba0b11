#include "core/sequence_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace genseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_annotations(const std::vector<std::vector<std::string>>& annotations) {
  require(!annotations.empty(), "sequence model: no annotations given");
  for (const auto& seq : annotations) {
    require(!seq.empty(), "sequence model: empty annotation sequence");
    for (const auto& label : seq) {
      require(!label.empty(), "sequence model: empty unit label");
      require(label != "START" && label != "END" && label != "bigram",
              "sequence model: label '" + label + "' is reserved");
    }
  }
}

std::vector<std::string> collect_vocabulary(
    const std::vector<std::vector<std::string>>& annotations) {
  std::set<std::string> vocab;
  for (const auto& seq : annotations) vocab.insert(seq.begin(), seq.end());
  return {vocab.begin(), vocab.end()};
}

}  // namespace

std::int64_t SequenceModel::label_index(const std::string& label) const {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), label);
  if (it == vocabulary.end() || *it != label) return -1;
  return it - vocabulary.begin();
}

bool SequenceModel::accepts(std::span<const std::string> s) const {
  if (kind != SequenceModelKind::path_grammar) return true;
  std::uint32_t node = 0;
  for (const auto& label : s) {
    const std::int64_t li = label_index(label);
    if (li < 0) return false;
    const auto& edges = trie[node].edges;
    const auto it = std::lower_bound(
        edges.begin(), edges.end(), std::make_pair(static_cast<std::uint32_t>(li), 0u),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it == edges.end() || it->first != static_cast<std::uint32_t>(li)) return false;
    node = it->second;
  }
  return trie[node].accepting;
}

SequenceModel build_path_grammar(const std::vector<std::vector<std::string>>& annotations) {
  check_annotations(annotations);
  SequenceModel model;
  model.kind = SequenceModelKind::path_grammar;
  model.vocabulary = collect_vocabulary(annotations);

  std::set<std::vector<std::string>> unique(annotations.begin(), annotations.end());
  model.paths.assign(unique.begin(), unique.end());

  // lexicographic insertion keeps each node's edge list sorted
  model.trie.emplace_back();
  for (const auto& path : model.paths) {
    std::uint32_t node = 0;
    for (const auto& label : path) {
      const auto li = static_cast<std::uint32_t>(model.label_index(label));
      auto& edges = model.trie[node].edges;
      const auto it =
          std::find_if(edges.begin(), edges.end(), [&](const auto& e) { return e.first == li; });
      if (it != edges.end()) {
        node = it->second;
      } else {
        const auto child = static_cast<std::uint32_t>(model.trie.size());
        edges.emplace_back(li, child);
        model.trie.emplace_back();
        node = child;
      }
    }
    model.trie[node].accepting = true;
  }
  return model;
}

SequenceModel build_bigram(const std::vector<std::vector<std::string>>& annotations,
                           double smoothing_k) {
  check_annotations(annotations);
  require(smoothing_k >= 0.0, "build_bigram: smoothing must be non-negative");
  SequenceModel model;
  model.kind = SequenceModelKind::bigram;
  model.vocabulary = collect_vocabulary(annotations);

  const std::size_t v = model.vocabulary.size();
  Matrix counts(v + 1, v + 1);  // row v = START, column v = END
  for (const auto& seq : annotations) {
    std::size_t prev = v;
    for (const auto& label : seq) {
      const auto li = static_cast<std::size_t>(model.label_index(label));
      counts(prev, li) += 1.0;
      prev = li;
    }
    counts(prev, v) += 1.0;
  }

  model.bigram_logp = Matrix(v + 1, v + 1, kNegInf);
  for (std::size_t r = 0; r <= v; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c <= v; ++c) total += counts(r, c);
    const double denom = total + smoothing_k * static_cast<double>(v + 1);
    if (denom <= 0.0) continue;  // label never observed as a predecessor (k = 0)
    for (std::size_t c = 0; c <= v; ++c) {
      const double p = (counts(r, c) + smoothing_k) / denom;
      model.bigram_logp(r, c) = p > 0.0 ? std::log(p) : kNegInf;
    }
  }
  return model;
}

double sequence_log_prior(const SequenceModel& model, std::span<const std::string> s) {
  for (const auto& label : s)
    if (model.label_index(label) < 0)
      fail(ErrorCode::out_of_vocabulary,
           "sequence_log_prior: label '" + label + "' not in the model vocabulary");

  if (model.kind == SequenceModelKind::path_grammar)
    return model.accepts(s) ? 0.0 : kNegInf;

  const std::size_t v = model.vocabulary.size();
  double total = 0.0;
  std::size_t prev = v;
  for (const auto& label : s) {
    const auto li = static_cast<std::size_t>(model.label_index(label));
    total += model.bigram_logp(prev, li);
    prev = li;
  }
  total += model.bigram_logp(prev, v);
  return total;
}

}  // namespace genseg
