#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace genseg {

// Diagonal-covariance Gaussian mixture. Serves both as the Fisher-vector
// codebook and as the per-state observation model of the unit HMMs.
struct DiagonalGmm {
  std::vector<double> weights;  // K, strictly positive, sums to 1
  Matrix means;                 // K x D
  Matrix variances;             // K x D, every entry >= floor used at fit time

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return means.cols(); }

  void validate() const;
};

struct GmmFitConfig {
  std::uint32_t max_iters = 100;
  // Absolute log-likelihood gain per sample below which EM stops.
  double tol = 1e-5;
  // Relative floor: per-dimension variance is clamped to
  // variance_floor * global per-dimension variance of the training data.
  double variance_floor = 1e-4;
  std::uint64_t seed = 0;
  std::uint32_t threads = 1;
};

struct GmmFitResult {
  DiagonalGmm model;
  std::vector<double> log_likelihood_trace;  // mean log-likelihood per sample, per iteration
  std::uint32_t iterations = 0;
};

// EM fit with k-means++ seeding followed by 10 k-means iterations.
// Deterministic for fixed (samples, k, config).
GmmFitResult fit_gmm(const Matrix& samples, std::size_t k, const GmmFitConfig& config);

// Responsibilities gamma(k) for one observation, log-domain with max
// subtraction; sums to 1.
std::vector<double> posteriors(const DiagonalGmm& gmm, std::span<const double> x);

// log sum_k w_k N(x; mu_k, sigma_k^2)
double log_likelihood(const DiagonalGmm& gmm, std::span<const double> x);

// i.i.d. draws, n x D. Deterministic for fixed seed.
Matrix sample_gmm(const DiagonalGmm& gmm, std::size_t n, std::uint64_t seed);

// Closed-form single-Gaussian ML fit with an absolute per-dimension
// variance floor. Shared by the HMM initializer.
DiagonalGmm fit_single_gaussian(const Matrix& samples, std::span<const double> variance_floor);

// Per-dimension variance of the rows of `samples`.
std::vector<double> column_variances(const Matrix& samples);

// log N(x; mu, sigma^2) for diagonal covariance, component k of `gmm`.
double log_gaussian(const DiagonalGmm& gmm, std::size_t k, std::span<const double> x);

}  // namespace genseg
