#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/gmm.hpp"
#include "core/matrix.hpp"

namespace genseg {

// Fisher vector of a feature set under a diagonal GMM: mean and
// standard-deviation gradients, concatenated as
// [G_mu,1 .. G_mu,K, G_sigma,1 .. G_sigma,K], each block of length D.
// Output length is 2*D*K, raw (no normalization).
std::vector<double> encode_fv(const DiagonalGmm& gmm, const Matrix& features);

// Element-wise signed square root.
void power_normalize(std::span<double> v);

// v / ||v||_2; an all-zero vector is left unchanged.
void l2_normalize(std::span<double> v);

// Per-frame encoding over a centered sliding window clamped to [0, T);
// each row is power-normalized then L2-normalized. Output is T x (2*D*K).
Matrix sliding_window_encode(const DiagonalGmm& gmm, const Matrix& seq,
                             std::size_t window = 20, std::uint32_t threads = 1);

inline std::size_t fisher_dim(const DiagonalGmm& gmm) {
  return 2 * gmm.dim() * gmm.components();
}

}  // namespace genseg
