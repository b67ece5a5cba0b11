#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/gmm.hpp"
#include "core/matrix.hpp"

namespace genseg {

// Left-to-right unit HMM: only self transitions and transitions to the
// next state; the final state's "next" probability is its exit
// probability. Observation model per state is a diagonal GMM.
struct UnitHmm {
  std::string label;
  std::vector<double> self_prob;        // S entries
  std::vector<double> next_prob;        // S entries; index S-1 is the exit
  std::vector<DiagonalGmm> states;      // S observation models

  std::size_t state_count() const { return states.size(); }
  std::size_t dim() const { return states.empty() ? 0 : states[0].dim(); }

  void validate() const;
};

struct HmmTrainConfig {
  std::uint32_t max_iters = 20;
  double tol = 1e-5;             // per-frame log-likelihood gain threshold
  double variance_floor = 1e-4;  // relative, as in GmmFitConfig
  std::uint32_t mixtures = 1;    // Gaussians per state
  std::uint32_t state_divisor = 10;
  std::uint64_t seed = 0;        // only used when mixtures > 1
  std::uint32_t threads = 1;
};

// State count = max(1, round(mean segment length / divisor)); each segment
// is subdivided evenly over time (remainder frames go to the later
// states), a Gaussian (or small GMM) is fitted per state, and transitions
// start at self 0.6 / next 0.4.
UnitHmm init_hmm(const std::string& label, const std::vector<Matrix>& segments,
                 const HmmTrainConfig& config = {});

struct BaumWelchResult {
  UnitHmm model;
  std::vector<double> log_likelihood_trace;  // total over used segments, per iteration
  std::uint32_t iterations = 0;
  std::size_t skipped_segments = 0;          // shorter than the state count
};

// Log-domain forward-backward re-estimation of transitions and state
// GMMs. Segments shorter than the state count are skipped (counted in the
// result); it is an error when nothing remains.
BaumWelchResult baum_welch(const UnitHmm& hmm, const std::vector<Matrix>& segments,
                           const HmmTrainConfig& config = {});

struct Alignment {
  std::vector<std::uint32_t> states;  // length T
  double log_score = 0.0;             // includes the final exit probability
};

// Best state sequence entering state 0 at frame 0 and exiting from the
// last state at frame T-1. Throws a no-path error when T < S.
Alignment viterbi_align(const UnitHmm& hmm, const Matrix& seq);

// Forward log-likelihood of the sequence under the unit (sum over paths).
double forward_log_likelihood(const UnitHmm& hmm, const Matrix& seq);

}  // namespace genseg
