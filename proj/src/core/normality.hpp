#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace genseg {

struct NormalityTestResult {
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;       // fail-to-reject at the given alpha
  bool degenerate = false; // constant sample; counted as a rejection
};

// Jarque-Bera: JB = n/6 * (S^2 + (K-3)^2 / 4) with sample skewness S and
// non-excess kurtosis K; p-value from chi-square with 2 dof.
NormalityTestResult jarque_bera(std::span<const double> samples, double alpha);

// Lilliefors: KS distance between the empirical CDF and a normal fitted to
// the same sample. P-values come from a Monte Carlo table (10,000
// simulations per sample-size bucket, n in {8..50} then log-spaced),
// linearly interpolated between buckets and cached on disk.
NormalityTestResult lilliefors(std::span<const double> samples, double alpha);

// The raw KS statistic used by lilliefors(), exposed for oracle checks.
double lilliefors_statistic(std::span<const double> samples);

struct NormalityReport {
  std::vector<double> alphas;
  std::vector<double> lilliefors_pass;   // fraction of dimensions passing, per alpha
  std::vector<double> jarque_bera_pass;
  std::size_t dims = 0;
  std::size_t samples_per_dim = 0;

  std::string to_csv() const;
};

// Subsamples rows without replacement per dimension (deterministic from
// seed and dimension index) and reports the fraction of dimensions that
// pass each test at each significance level.
NormalityReport dimension_pass_report(const Matrix& data, std::span<const double> alphas,
                                      std::size_t samples_per_dim, std::uint64_t seed,
                                      std::uint32_t threads = 1);

// Override the Lilliefors table cache directory before first use
// (defaults to $GENSEG_CACHE, else $HOME/.cache/genseg, else the
// system temp directory). Empty disables caching.
void set_lilliefors_cache_dir(const std::string& dir);

}  // namespace genseg
