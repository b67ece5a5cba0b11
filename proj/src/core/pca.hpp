#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace genseg {

// Leading principal directions of the training covariance. `basis` holds
// one input dimension per row and one retained direction per column;
// columns are orthonormal, eigenvalues sorted descending. Column signs are
// fixed by making each column's largest-magnitude entry positive so that
// serialization is deterministic.
struct PcaModel {
  std::vector<double> mean;         // M
  Matrix basis;                     // M x D'
  std::vector<double> eigenvalues;  // D', descending
  bool whiten = false;
  double epsilon = 1e-8;            // floor inside the whitening square root

  std::size_t in_dim() const { return mean.size(); }
  std::size_t out_dim() const { return eigenvalues.size(); }
};

// Eigendecomposition of the 1/(N-1) sample covariance; keeps the top
// `out_dim` directions. Uses the N x N Gram matrix instead when the input
// dimension exceeds the sample count.
PcaModel fit_pca(const Matrix& samples, std::size_t out_dim, bool whiten);

// basis^T (v - mean), each coordinate divided by sqrt(eigenvalue + epsilon)
// when the model whitens.
std::vector<double> project(const PcaModel& pca, std::span<const double> v);

// Row-wise projection.
Matrix project_rows(const PcaModel& pca, const Matrix& rows);

// Inverse of project up to the discarded subspace.
std::vector<double> reconstruct(const PcaModel& pca, std::span<const double> y);

// Each column divided by its Euclidean norm over the clip; zero columns
// are left unchanged.
Matrix clip_l2_per_dimension(const Matrix& seq);

}  // namespace genseg
