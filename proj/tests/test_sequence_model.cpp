#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "core/sequence_model.hpp"

using namespace genseg;

namespace {

using Annotations = std::vector<std::vector<std::string>>;

std::vector<std::string> random_sequence(Rng& rng, const std::vector<std::string>& vocab,
                                         std::size_t max_len) {
  std::vector<std::string> s(1 + rng.below(max_len));
  for (auto& label : s) label = vocab[rng.below(vocab.size())];
  return s;
}

}  // namespace

TEST_CASE("path grammar accepts exactly the training sequences") {
  const Annotations annotations = {{"A", "B"}, {"A", "C"}};
  const auto model = build_path_grammar(annotations);
  CHECK(model.accepts(std::vector<std::string>{"A", "B"}));
  CHECK(model.accepts(std::vector<std::string>{"A", "C"}));
  CHECK_FALSE(model.accepts(std::vector<std::string>{"B", "A"}));
  CHECK_FALSE(model.accepts(std::vector<std::string>{"A"}));
  CHECK_FALSE(model.accepts(std::vector<std::string>{"A", "B", "C"}));
}

TEST_CASE("a single annotation gives a single path of length 1") {
  const auto model = build_path_grammar({{"A"}});
  CHECK(model.paths.size() == 1);
  CHECK(model.paths[0] == std::vector<std::string>{"A"});
  CHECK(model.accepts(std::vector<std::string>{"A"}));
  CHECK_FALSE(model.accepts(std::vector<std::string>{"A", "A"}));
}

TEST_CASE("path grammar membership matches a linear-scan oracle") {
  Rng rng(42);
  const std::vector<std::string> vocab = {"u0", "u1", "u2", "u3"};
  Annotations annotations;
  for (int i = 0; i < 100; ++i) annotations.push_back(random_sequence(rng, vocab, 5));
  const auto model = build_path_grammar(annotations);

  const auto member = [&](const std::vector<std::string>& s) {
    for (const auto& a : annotations)
      if (a == s) return true;
    return false;
  };
  for (const auto& a : annotations) CHECK(model.accepts(a));

  std::size_t rejected = 0;
  while (rejected < 100) {
    auto probe = random_sequence(rng, vocab, 6);
    probe.push_back(vocab[rng.below(vocab.size())]);
    if (member(probe)) continue;
    CHECK_FALSE(model.accepts(probe));
    ++rejected;
  }
}

TEST_CASE("unsmoothed bigram reproduces count ratios") {
  const Annotations annotations = {{"A", "B"}, {"A", "B"}};
  const auto model = build_bigram(annotations, 0.0);
  const std::vector<std::string> ab = {"A", "B"};
  CHECK(sequence_log_prior(model, ab) == doctest::Approx(0.0));  // all transitions certain

  const std::size_t v = model.vocabulary.size();
  const auto idx = [&](const std::string& l) {
    return static_cast<std::size_t>(model.label_index(l));
  };
  CHECK(std::exp(model.bigram_logp(v, idx("A"))) == doctest::Approx(1.0));
  CHECK(std::exp(model.bigram_logp(idx("A"), idx("B"))) == doctest::Approx(1.0));
  CHECK(std::exp(model.bigram_logp(idx("B"), v)) == doctest::Approx(1.0));
}

TEST_CASE("smoothing makes every in-vocabulary transition possible") {
  const auto model = build_bigram({{"A", "B"}, {"B", "C"}}, 0.01);
  const std::size_t v = model.vocabulary.size();
  for (std::size_t r = 0; r <= v; ++r)
    for (std::size_t c = 0; c <= v; ++c) CHECK(model.bigram_logp(r, c) > -INFINITY);
}

TEST_CASE("bigram rows sum to one on random corpora") {
  Rng rng(7);
  const std::vector<std::string> vocab = {"x", "y", "z", "w", "v"};
  for (int rep = 0; rep < 10; ++rep) {
    Annotations annotations;
    for (int i = 0; i < 20; ++i) annotations.push_back(random_sequence(rng, vocab, 7));
    const auto model = build_bigram(annotations, rep % 2 == 0 ? 0.0 : 0.01);
    const std::size_t v = model.vocabulary.size();
    for (std::size_t r = 0; r <= v; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c <= v; ++c) {
        const double lp = model.bigram_logp(r, c);
        if (lp > -INFINITY) total += std::exp(lp);
      }
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("sequence_log_prior distinguishes rejection from out-of-vocabulary") {
  const auto grammar = build_path_grammar({{"A", "B"}});
  CHECK(sequence_log_prior(grammar, std::vector<std::string>{"A", "B"}) == 0.0);
  CHECK(sequence_log_prior(grammar, std::vector<std::string>{"B", "A"}) == -INFINITY);
  try {
    sequence_log_prior(grammar, std::vector<std::string>{"A", "Z"});
    FAIL("expected an out-of-vocabulary error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_vocabulary);
  }
}

TEST_CASE("bigram prior matches a count-table recomputation") {
  Rng rng(13);
  const std::vector<std::string> vocab = {"a", "b", "c"};
  Annotations annotations;
  for (int i = 0; i < 30; ++i) annotations.push_back(random_sequence(rng, vocab, 5));
  const double k = 0.01;
  const auto model = build_bigram(annotations, k);

  // independent count-based recomputation
  const auto count_score = [&](const std::vector<std::string>& s) {
    const auto count_pair = [&](const std::string& p, const std::string& n) {
      double c = 0.0;
      for (const auto& a : annotations) {
        std::string prev = "<s>";
        for (const auto& label : a) {
          if (prev == p && label == n) c += 1.0;
          prev = label;
        }
        if (prev == p && n == "</s>") c += 1.0;
      }
      return c;
    };
    const auto count_prev = [&](const std::string& p) {
      double c = 0.0;
      for (const auto& a : annotations) {
        std::string prev = "<s>";
        for (const auto& label : a) {
          if (prev == p) c += 1.0;
          prev = label;
        }
        if (prev == p) c += 1.0;
      }
      return c;
    };
    const double denom_extra = k * static_cast<double>(vocab.size() + 1);
    double total = 0.0;
    std::string prev = "<s>";
    for (const auto& label : s) {
      total += std::log((count_pair(prev, label) + k) / (count_prev(prev) + denom_extra));
      prev = label;
    }
    total += std::log((count_pair(prev, "</s>") + k) / (count_prev(prev) + denom_extra));
    return total;
  };

  for (int rep = 0; rep < 10; ++rep) {
    const auto s = random_sequence(rng, vocab, 4);
    CHECK(sequence_log_prior(model, s) == doctest::Approx(count_score(s)).epsilon(1e-12));
  }
}

TEST_CASE("adding an observation never lowers its smoothed probability") {
  const double k = 0.01;
  Annotations base = {{"A", "B"}, {"A", "C"}, {"B", "C"}};
  const auto before = build_bigram(base, k);
  base.push_back({"A", "B"});
  const auto after = build_bigram(base, k);
  const auto idx_before = static_cast<std::size_t>(before.label_index("A"));
  const auto idx_after = static_cast<std::size_t>(after.label_index("A"));
  const auto b_before = static_cast<std::size_t>(before.label_index("B"));
  const auto b_after = static_cast<std::size_t>(after.label_index("B"));
  CHECK(after.bigram_logp(idx_after, b_after) >= before.bigram_logp(idx_before, b_before));
}

TEST_CASE("sequence model input validation") {
  CHECK_THROWS_AS(build_path_grammar({}), Error);
  CHECK_THROWS_AS(build_path_grammar({{}}), Error);
  CHECK_THROWS_AS(build_bigram({{"START"}}, 0.01), Error);  // reserved label
}
