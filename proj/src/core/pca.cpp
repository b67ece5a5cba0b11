#include "core/pca.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace genseg {

namespace {

using EMatrix = Eigen::MatrixXd;

void fix_column_signs(Matrix& basis) {
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t r = 0; r < basis.rows(); ++r) {
      const double mag = std::abs(basis(r, c));
      if (mag > best) { best = mag; arg = r; }
    }
    if (basis(arg, c) < 0.0)
      for (std::size_t r = 0; r < basis.rows(); ++r) basis(r, c) = -basis(r, c);
  }
}

}  // namespace

PcaModel fit_pca(const Matrix& samples, std::size_t out_dim, bool whiten) {
  const std::size_t n = samples.rows(), m = samples.cols();
  require(n >= 2, "fit_pca: need at least two samples");
  require(out_dim >= 1, "fit_pca: output dimension must be >= 1");
  require(out_dim <= std::min(n - 1, m),
          "fit_pca: output dimension exceeds min(N-1, M)");
  require(samples.all_finite(), "fit_pca: non-finite sample values");

  PcaModel pca;
  pca.whiten = whiten;
  pca.mean.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < m; ++d) pca.mean[d] += row[d];
  }
  for (std::size_t d = 0; d < m; ++d) pca.mean[d] /= static_cast<double>(n);

  EMatrix centered(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < m; ++d)
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          row[d] - pca.mean[d];
  }
  require(centered.squaredNorm() > 0.0, "fit_pca: zero-variance input");

  pca.basis = Matrix(m, out_dim);
  pca.eigenvalues.assign(out_dim, 0.0);

  if (m <= n) {
    EMatrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<EMatrix> solver(cov);
    require(solver.info() == Eigen::Success, "fit_pca: eigendecomposition failed");
    // eigenvalues ascend; take the trailing out_dim in reverse
    for (std::size_t j = 0; j < out_dim; ++j) {
      const Eigen::Index src = static_cast<Eigen::Index>(m - 1 - j);
      pca.eigenvalues[j] = std::max(0.0, solver.eigenvalues()(src));
      for (std::size_t r = 0; r < m; ++r)
        pca.basis(r, j) = solver.eigenvectors()(static_cast<Eigen::Index>(r), src);
    }
  } else {
    // Gram-matrix route: eigenvectors of X X^T lifted back through X^T.
    EMatrix gram = centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<EMatrix> solver(gram);
    require(solver.info() == Eigen::Success, "fit_pca: eigendecomposition failed");
    for (std::size_t j = 0; j < out_dim; ++j) {
      const Eigen::Index src = static_cast<Eigen::Index>(n - 1 - j);
      const double lambda = std::max(0.0, solver.eigenvalues()(src));
      pca.eigenvalues[j] = lambda;
      Eigen::VectorXd v = centered.transpose() * solver.eigenvectors().col(src);
      const double norm = v.norm();
      require(norm > 0.0, "fit_pca: requested direction has zero variance");
      v /= norm;
      for (std::size_t r = 0; r < m; ++r)
        pca.basis(r, j) = v(static_cast<Eigen::Index>(r));
    }
  }

  fix_column_signs(pca.basis);
  return pca;
}

std::vector<double> project(const PcaModel& pca, std::span<const double> v) {
  require(v.size() == pca.in_dim(), "project: dimension mismatch");
  const std::size_t m = pca.in_dim(), dp = pca.out_dim();
  std::vector<double> out(dp, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double centered = v[r] - pca.mean[r];
    if (centered == 0.0) continue;
    auto brow = pca.basis.row(r);
    for (std::size_t j = 0; j < dp; ++j) out[j] += brow[j] * centered;
  }
  if (pca.whiten)
    for (std::size_t j = 0; j < dp; ++j)
      out[j] /= std::sqrt(pca.eigenvalues[j] + pca.epsilon);
  return out;
}

Matrix project_rows(const PcaModel& pca, const Matrix& rows) {
  require(rows.cols() == pca.in_dim(), "project: dimension mismatch");
  Matrix out(rows.rows(), pca.out_dim());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto y = project(pca, rows.row(i));
    std::copy(y.begin(), y.end(), out.row(i).data());
  }
  return out;
}

std::vector<double> reconstruct(const PcaModel& pca, std::span<const double> y) {
  require(y.size() == pca.out_dim(), "reconstruct: dimension mismatch");
  const std::size_t m = pca.in_dim(), dp = pca.out_dim();
  std::vector<double> scaled(y.begin(), y.end());
  if (pca.whiten)
    for (std::size_t j = 0; j < dp; ++j)
      scaled[j] *= std::sqrt(pca.eigenvalues[j] + pca.epsilon);
  std::vector<double> out(pca.mean);
  for (std::size_t r = 0; r < m; ++r) {
    auto brow = pca.basis.row(r);
    for (std::size_t j = 0; j < dp; ++j) out[r] += brow[j] * scaled[j];
  }
  return out;
}

Matrix clip_l2_per_dimension(const Matrix& seq) {
  require(seq.rows() >= 1, "clip_l2: empty sequence");
  Matrix out = seq;
  for (std::size_t d = 0; d < seq.cols(); ++d) {
    double norm2 = 0.0;
    for (std::size_t t = 0; t < seq.rows(); ++t) norm2 += seq(t, d) * seq(t, d);
    if (norm2 <= 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t t = 0; t < seq.rows(); ++t) out(t, d) *= inv;
  }
  return out;
}

}  // namespace genseg
