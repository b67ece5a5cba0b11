#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace genseg {

enum class SequenceModelKind { path_grammar, bigram };

// Prior over unit-label sequences. The path grammar accepts exactly the
// deduplicated training sequences, compiled into a prefix-shared trie with
// one start node and accepting leaves feeding a single implicit end. The
// bigram variant holds an add-k smoothed transition table over the closed
// vocabulary plus START/END.
struct SequenceModel {
  struct TrieNode {
    // (vocabulary index, child node), sorted by label index
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    bool accepting = false;
  };

  SequenceModelKind kind = SequenceModelKind::path_grammar;
  std::vector<std::string> vocabulary;              // sorted unique labels
  std::vector<std::vector<std::string>> paths;      // dedup + sorted (path grammar)
  std::vector<TrieNode> trie;                       // node 0 is the start
  Matrix bigram_logp;  // (V+1) x (V+1); row V = START, column V = END

  bool accepts(std::span<const std::string> s) const;
  std::int64_t label_index(const std::string& label) const;  // -1 when unknown
};

// Deduplicates the annotations and compiles the trie. Rejects empty input
// and empty sequences.
SequenceModel build_path_grammar(const std::vector<std::vector<std::string>>& annotations);

// Add-k smoothed bigram over the closed vocabulary, including START/END
// transitions.
SequenceModel build_bigram(const std::vector<std::vector<std::string>>& annotations,
                           double smoothing_k = 0.01);

// Path grammar: 0 when accepted, -inf when rejected. Bigram: sum of
// transition log-probabilities including START and END. Labels outside the
// vocabulary raise an out-of-vocabulary error (distinct from rejection).
double sequence_log_prior(const SequenceModel& model, std::span<const std::string> s);

}  // namespace genseg
