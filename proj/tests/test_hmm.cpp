#include <doctest.h>

#include <cmath>

#include "core/hmm.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace genseg;

namespace {

// left-to-right sampler for a known generator unit
Matrix sample_unit(const UnitHmm& hmm, std::size_t t_len, Rng& rng) {
  Matrix seq(t_len, hmm.dim());
  std::size_t j = 0;
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t d = 0; d < hmm.dim(); ++d)
      seq(t, d) = rng.normal(hmm.states[j].means(0, d),
                             std::sqrt(hmm.states[j].variances(0, d)));
    const std::size_t remaining_states = hmm.state_count() - 1 - j;
    const std::size_t remaining_frames = t_len - 1 - t;
    if (remaining_states == remaining_frames) {
      if (remaining_states > 0) ++j;
    } else if (j + 1 < hmm.state_count() && rng.uniform01() < hmm.next_prob[j]) {
      ++j;
    }
  }
  return seq;
}

}  // namespace

TEST_CASE("init_hmm state count follows the divisor rule") {
  Rng rng(1);
  std::vector<Matrix> segments = {oracle::random_matrix(40, 2, rng),
                                  oracle::random_matrix(60, 2, rng)};
  const auto hmm = init_hmm("unit", segments);  // mean length 50 -> 5 states
  CHECK(hmm.state_count() == 5);

  HmmTrainConfig cfg;
  cfg.state_divisor = 25;
  CHECK(init_hmm("unit", segments, cfg).state_count() == 2);
}

TEST_CASE("init_hmm assigns one frame per state on a length-S segment") {
  Matrix seg(3, 1);
  seg(0, 0) = -4.0;
  seg(1, 0) = 0.5;
  seg(2, 0) = 9.0;
  HmmTrainConfig cfg;
  cfg.state_divisor = 1;
  const auto hmm = init_hmm("unit", {seg}, cfg);
  REQUIRE(hmm.state_count() == 3);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(hmm.states[j].means(0, 0) == doctest::Approx(seg(j, 0)));
}

TEST_CASE("init_hmm transition defaults are 0.6 / 0.4") {
  Rng rng(2);
  const auto hmm = init_hmm("unit", {oracle::random_matrix(30, 2, rng)});
  for (std::size_t j = 0; j < hmm.state_count(); ++j) {
    CHECK(hmm.self_prob[j] == doctest::Approx(0.6));
    CHECK(hmm.next_prob[j] == doctest::Approx(0.4));
  }
}

TEST_CASE("init_hmm rejects an empty segment list") {
  CHECK_THROWS_AS(init_hmm("unit", {}), Error);
}

TEST_CASE("baum_welch with a single state pools all frames") {
  Rng rng(3);
  std::vector<Matrix> segments;
  for (int i = 0; i < 4; ++i) segments.push_back(oracle::random_matrix(12, 2, rng));
  HmmTrainConfig cfg;
  cfg.state_divisor = 1000;  // forces S = 1
  cfg.max_iters = 1;
  const auto init = init_hmm("unit", segments, cfg);
  REQUIRE(init.state_count() == 1);
  const auto result = baum_welch(init, segments, cfg);

  std::size_t total = 0;
  for (const auto& s : segments) total += s.rows();
  Matrix pooled(total, 2);
  std::size_t at = 0;
  for (const auto& s : segments) {
    std::copy(s.storage().begin(), s.storage().end(), pooled.data() + at * 2);
    at += s.rows();
  }
  std::vector<double> mean(2, 0.0);
  for (std::size_t i = 0; i < pooled.rows(); ++i)
    for (std::size_t d = 0; d < 2; ++d) mean[d] += pooled(i, d);
  for (auto& m : mean) m /= static_cast<double>(pooled.rows());
  for (std::size_t d = 0; d < 2; ++d)
    CHECK(result.model.states[0].means(0, d) == doctest::Approx(mean[d]).epsilon(1e-10));
}

TEST_CASE("baum_welch recovers a 3-state generator with 6-sigma separation") {
  UnitHmm truth;
  truth.label = "gen";
  truth.self_prob.assign(3, 0.7);
  truth.next_prob.assign(3, 0.3);
  for (std::size_t j = 0; j < 3; ++j) {
    DiagonalGmm g;
    g.weights = {1.0};
    g.means = Matrix(1, 2);
    g.means(0, 0) = 6.0 * static_cast<double>(j);
    g.means(0, 1) = -6.0 * static_cast<double>(j);
    g.variances = Matrix(1, 2, 1.0);
    truth.states.push_back(g);
  }
  Rng rng(17);
  std::vector<Matrix> segments;
  for (int i = 0; i < 200; ++i) segments.push_back(sample_unit(truth, 15 + i % 10, rng));

  HmmTrainConfig cfg;
  cfg.state_divisor = 6;  // mean length ~19.5 -> 3 states
  cfg.max_iters = 20;
  const auto init = init_hmm("gen", segments, cfg);
  REQUIRE(init.state_count() == 3);
  const auto result = baum_welch(init, segments, cfg);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(result.model.states[j].means(0, 0) - truth.states[j].means(0, 0)) < 0.1);
    CHECK(std::abs(result.model.states[j].means(0, 1) - truth.states[j].means(0, 1)) < 0.1);
  }
}

TEST_CASE("baum_welch log-likelihood is monotone on random instances") {
  for (std::uint64_t instance = 0; instance < 50; ++instance) {
    Rng rng(9000 + instance);
    const std::size_t s_count = 1 + instance % 3;
    std::vector<Matrix> segments;
    for (std::size_t i = 0; i < 3 + instance % 4; ++i)
      segments.push_back(oracle::random_matrix(s_count + 4 + instance % 6, 2, rng));
    const auto unit = oracle::random_unit("u", s_count, 2, rng);
    HmmTrainConfig cfg;
    cfg.max_iters = 8;
    cfg.tol = 0.0;
    const auto result = baum_welch(unit, segments, cfg);
    for (std::size_t i = 1; i < result.log_likelihood_trace.size(); ++i)
      CHECK(result.log_likelihood_trace[i] >= result.log_likelihood_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("baum_welch with max_iters = 0 returns its input") {
  Rng rng(5);
  const auto unit = oracle::random_unit("u", 2, 2, rng);
  const std::vector<Matrix> segments = {oracle::random_matrix(9, 2, rng)};
  HmmTrainConfig cfg;
  cfg.max_iters = 0;
  const auto result = baum_welch(unit, segments, cfg);
  CHECK(result.model.self_prob == unit.self_prob);
  CHECK(result.model.next_prob == unit.next_prob);
  for (std::size_t j = 0; j < unit.state_count(); ++j) {
    CHECK(result.model.states[j].means == unit.states[j].means);
    CHECK(result.model.states[j].variances == unit.states[j].variances);
  }
}

TEST_CASE("baum_welch skips short segments and fails when all are short") {
  Rng rng(6);
  const auto unit = oracle::random_unit("u", 3, 2, rng);
  std::vector<Matrix> mixed = {oracle::random_matrix(2, 2, rng),
                               oracle::random_matrix(8, 2, rng)};
  const auto result = baum_welch(unit, mixed, {});
  CHECK(result.skipped_segments == 1);

  std::vector<Matrix> all_short = {oracle::random_matrix(2, 2, rng)};
  CHECK_THROWS_AS(baum_welch(unit, all_short, {}), Error);
}

TEST_CASE("transition rows stay normalized after re-estimation") {
  Rng rng(7);
  const auto unit = oracle::random_unit("u", 3, 2, rng);
  std::vector<Matrix> segments;
  for (int i = 0; i < 5; ++i) segments.push_back(oracle::random_matrix(10, 2, rng));
  HmmTrainConfig cfg;
  cfg.max_iters = 5;
  const auto result = baum_welch(unit, segments, cfg);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(result.model.self_prob[j] + result.model.next_prob[j] - 1.0) < 1e-10);
}

TEST_CASE("viterbi_align single-state score formula") {
  Rng rng(8);
  const auto unit = oracle::random_unit("u", 1, 2, rng);
  const Matrix seq = oracle::random_matrix(7, 2, rng);
  const auto alignment = viterbi_align(unit, seq);
  double expected = 0.0;
  for (std::size_t t = 0; t < seq.rows(); ++t)
    expected += log_likelihood(unit.states[0], seq.row(t));
  expected += 6.0 * std::log(unit.self_prob[0]) + std::log(unit.next_prob[0]);
  CHECK(alignment.log_score == doctest::Approx(expected).epsilon(1e-12));
  for (auto s : alignment.states) CHECK(s == 0);
}

TEST_CASE("viterbi_align finds the generator boundary of a 2-state instance") {
  UnitHmm truth;
  truth.label = "b";
  truth.self_prob.assign(2, 0.5);
  truth.next_prob.assign(2, 0.5);
  for (std::size_t j = 0; j < 2; ++j) {
    DiagonalGmm g;
    g.weights = {1.0};
    g.means = Matrix(1, 1, j == 0 ? 0.0 : 8.0);
    g.variances = Matrix(1, 1, 1.0);
    truth.states.push_back(g);
  }
  Rng rng(9);
  const std::size_t switch_at = 6;
  Matrix seq(14, 1);
  for (std::size_t t = 0; t < seq.rows(); ++t)
    seq(t, 0) = rng.normal(t < switch_at ? 0.0 : 8.0, 1.0);
  const auto alignment = viterbi_align(truth, seq);
  for (std::size_t t = 0; t < seq.rows(); ++t)
    CHECK(alignment.states[t] == (t < switch_at ? 0u : 1u));
}

TEST_CASE("viterbi_align matches exhaustive path enumeration") {
  for (std::uint64_t instance = 0; instance < 30; ++instance) {
    Rng rng(4000 + instance);
    const std::size_t s_count = 1 + instance % 4;
    const std::size_t t_len = s_count + instance % (13 - s_count);
    const auto unit = oracle::random_unit("u", s_count, 2, rng);
    const Matrix seq = oracle::random_matrix(t_len, 2, rng);
    const auto alignment = viterbi_align(unit, seq);
    CHECK(alignment.log_score ==
          doctest::Approx(oracle::enumerate_alignment(unit, seq)).epsilon(1e-9));
  }
}

TEST_CASE("viterbi_align score never exceeds the forward log-likelihood") {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(5000 + instance);
    const std::size_t s_count = 1 + instance % 3;
    const auto unit = oracle::random_unit("u", s_count, 2, rng);
    const Matrix seq = oracle::random_matrix(s_count + 5, 2, rng);
    CHECK(viterbi_align(unit, seq).log_score <=
          forward_log_likelihood(unit, seq) + 1e-12);
  }
}

TEST_CASE("viterbi_align reports no path for too-short sequences") {
  Rng rng(10);
  const auto unit = oracle::random_unit("u", 4, 2, rng);
  const Matrix seq = oracle::random_matrix(3, 2, rng);
  try {
    viterbi_align(unit, seq);
    FAIL("expected a no-path error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_path);
  }
}
