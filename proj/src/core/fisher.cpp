#include "core/fisher.hpp"

#include <cmath>

#include "core/parallel.hpp"

namespace genseg {

namespace {
// responsibilities below this are treated as exact zeros
constexpr double kPosteriorCutoff = 1e-8;
}

std::vector<double> encode_fv(const DiagonalGmm& gmm, const Matrix& features) {
  require(features.rows() >= 1, "encode_fv: empty feature set");
  require(features.cols() == gmm.dim(), "encode_fv: dimension mismatch");
  require(features.all_finite(), "encode_fv: non-finite feature values");

  const std::size_t t_count = features.rows();
  const std::size_t dim = gmm.dim();
  const std::size_t k = gmm.components();
  std::vector<double> fv(2 * dim * k, 0.0);

  for (std::size_t t = 0; t < t_count; ++t) {
    auto x = features.row(t);
    const auto gamma = posteriors(gmm, x);
    for (std::size_t c = 0; c < k; ++c) {
      if (gamma[c] < kPosteriorCutoff) continue;
      auto mu = gmm.means.row(c);
      auto var = gmm.variances.row(c);
      double* gmu = fv.data() + c * dim;
      double* gsig = fv.data() + (k + c) * dim;
      for (std::size_t d = 0; d < dim; ++d) {
        const double z = (x[d] - mu[d]) / std::sqrt(var[d]);
        gmu[d] += gamma[c] * z;
        gsig[d] += gamma[c] * (z * z - 1.0);
      }
    }
  }

  const double inv_t = 1.0 / static_cast<double>(t_count);
  for (std::size_t c = 0; c < k; ++c) {
    const double mu_scale = inv_t / std::sqrt(gmm.weights[c]);
    const double sig_scale = inv_t / std::sqrt(2.0 * gmm.weights[c]);
    double* gmu = fv.data() + c * dim;
    double* gsig = fv.data() + (k + c) * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      gmu[d] *= mu_scale;
      gsig[d] *= sig_scale;
    }
  }
  return fv;
}

void power_normalize(std::span<double> v) {
  for (double& x : v) x = x >= 0.0 ? std::sqrt(x) : -std::sqrt(-x);
}

void l2_normalize(std::span<double> v) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 <= 0.0) return;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
}

Matrix sliding_window_encode(const DiagonalGmm& gmm, const Matrix& seq,
                             std::size_t window, std::uint32_t threads) {
  require(seq.rows() >= 1, "sliding_window_encode: empty sequence");
  require(window >= 1, "sliding_window_encode: window must be >= 1");
  require(seq.cols() == gmm.dim(), "sliding_window_encode: dimension mismatch");

  const std::size_t t_count = seq.rows();
  const std::size_t out_dim = fisher_dim(gmm);
  const std::size_t half_lo = window / 2;
  const std::size_t half_hi = window - half_lo;  // ceil(window/2)
  Matrix out(t_count, out_dim);

  for_each_block(t_count, 64, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t lo = t >= half_lo ? t - half_lo : 0;
      const std::size_t hi = std::min(t_count, t + half_hi);
      const Matrix win = seq.slice_rows(lo, hi);
      auto fv = encode_fv(gmm, win);
      power_normalize(fv);
      l2_normalize(fv);
      std::copy(fv.begin(), fv.end(), out.row(t).data());
    }
  });
  return out;
}

}  // namespace genseg
