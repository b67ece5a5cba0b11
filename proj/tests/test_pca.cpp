#include <doctest.h>

#include <cmath>

#include "core/pca.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace genseg;

TEST_CASE("fit_pca finds the diagonal direction of y=x data") {
  Matrix samples(50, 2);
  Rng rng(1);
  for (std::size_t i = 0; i < 50; ++i) {
    const double t = rng.normal();
    samples(i, 0) = t;
    samples(i, 1) = t;
  }
  const auto pca = fit_pca(samples, 1, false);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(pca.basis(0, 0)) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
  CHECK(std::abs(pca.basis(1, 0)) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
  CHECK(pca.basis(0, 0) * pca.basis(1, 0) > 0.0);  // same sign along y=x
}

TEST_CASE("whitened projections have unit variance per dimension") {
  Rng rng(2);
  Matrix samples(400, 6);
  for (std::size_t i = 0; i < samples.rows(); ++i)
    for (std::size_t d = 0; d < 6; ++d)
      samples(i, d) = rng.normal(0.0, 1.0 + static_cast<double>(d));
  const auto pca = fit_pca(samples, 4, true);
  const Matrix projected = project_rows(pca, samples);
  for (std::size_t d = 0; d < 4; ++d) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < projected.rows(); ++i) mean += projected(i, d);
    mean /= static_cast<double>(projected.rows());
    for (std::size_t i = 0; i < projected.rows(); ++i)
      var += (projected(i, d) - mean) * (projected(i, d) - mean);
    var /= static_cast<double>(projected.rows() - 1);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("basis is orthonormal with descending eigenvalues") {
  Rng rng(3);
  const Matrix samples = oracle::random_matrix(120, 10, rng, 2.0);
  const auto pca = fit_pca(samples, 6, false);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < 10; ++r) dot += pca.basis(r, a) * pca.basis(r, b);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  }
  for (std::size_t j = 1; j < pca.eigenvalues.size(); ++j)
    CHECK(pca.eigenvalues[j] <= pca.eigenvalues[j - 1]);
}

TEST_CASE("top-D' reconstruction beats random orthonormal projections") {
  Rng rng(4);
  const Matrix samples = oracle::random_matrix(80, 8, rng, 1.5);
  const auto pca = fit_pca(samples, 3, false);
  const double best = oracle::projection_residual(samples, pca.mean, pca.basis);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix basis = oracle::random_orthonormal(8, 3, rng);
    CHECK(best <= oracle::projection_residual(samples, pca.mean, basis) + 1e-9);
  }
}

TEST_CASE("project maps the mean to zero and inverts on low-rank data") {
  Rng rng(5);
  // rank-2 data in 5 dimensions
  Matrix samples(60, 5);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const double a = rng.normal(), b = rng.normal();
    for (std::size_t d = 0; d < 5; ++d)
      samples(i, d) = a * (1.0 + static_cast<double>(d)) + b * std::cos(double(d)) + 0.5;
  }
  const auto pca = fit_pca(samples, 2, false);
  const auto zero = project(pca, pca.mean);
  for (double v : zero) CHECK(std::abs(v) < 1e-12);

  for (std::size_t i = 0; i < 10; ++i) {
    const auto projected = project(pca, samples.row(i));
    const auto rebuilt = reconstruct(pca, projected);
    for (std::size_t d = 0; d < 5; ++d)
      CHECK(std::abs(rebuilt[d] - samples(i, d)) < 1e-8);
  }
}

TEST_CASE("project is affine without whitening") {
  Rng rng(6);
  const Matrix samples = oracle::random_matrix(50, 4, rng);
  const auto pca = fit_pca(samples, 3, false);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> u(4), v(4);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    const double alpha = rng.uniform01();
    std::vector<double> mix(4);
    for (std::size_t d = 0; d < 4; ++d) mix[d] = alpha * u[d] + (1.0 - alpha) * v[d];
    const auto pu = project(pca, u);
    const auto pv = project(pca, v);
    const auto pm = project(pca, mix);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(pm[j] - (alpha * pu[j] + (1.0 - alpha) * pv[j])) < 1e-10);
  }
}

TEST_CASE("Gram-matrix path (M > N) keeps the same invariants") {
  Rng rng(7);
  const Matrix samples = oracle::random_matrix(12, 40, rng, 1.2);
  const auto pca = fit_pca(samples, 5, true);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < 40; ++r) dot += pca.basis(r, a) * pca.basis(r, b);
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  const Matrix projected = project_rows(pca, samples);
  for (std::size_t d = 0; d < 5; ++d) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < projected.rows(); ++i) mean += projected(i, d);
    mean /= static_cast<double>(projected.rows());
    for (std::size_t i = 0; i < projected.rows(); ++i)
      var += (projected(i, d) - mean) * (projected(i, d) - mean);
    var /= static_cast<double>(projected.rows() - 1);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("fit_pca input validation") {
  Rng rng(8);
  const Matrix samples = oracle::random_matrix(10, 4, rng);
  CHECK_THROWS_AS(fit_pca(samples, 5, false), Error);   // D' > M
  CHECK_THROWS_AS(fit_pca(samples, 10, false), Error);  // D' > N-1
  CHECK_THROWS_AS(fit_pca(Matrix(6, 3, 1.5), 2, false), Error);  // zero variance
  CHECK_THROWS_AS(project(fit_pca(samples, 2, false), std::vector<double>(3, 0.0)),
                  Error);
}

TEST_CASE("clip_l2_per_dimension normalizes columns over the clip") {
  Rng rng(9);
  Matrix seq = oracle::random_matrix(20, 3, rng);
  for (std::size_t t = 0; t < seq.rows(); ++t) seq(t, 2) = 0.0;  // zero column
  const Matrix out = clip_l2_per_dimension(seq);
  for (std::size_t d = 0; d < 2; ++d) {
    double norm = 0.0;
    for (std::size_t t = 0; t < out.rows(); ++t) norm += out(t, d) * out(t, d);
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-10);
  }
  for (std::size_t t = 0; t < out.rows(); ++t) CHECK(out(t, 2) == 0.0);

  // single-frame clips collapse to signs
  Matrix one(1, 2);
  one(0, 0) = -3.7;
  one(0, 1) = 0.4;
  const Matrix clipped = clip_l2_per_dimension(one);
  CHECK(clipped(0, 0) == doctest::Approx(-1.0));
  CHECK(clipped(0, 1) == doctest::Approx(1.0));

  // scale invariance per column
  Matrix scaled = seq;
  for (std::size_t t = 0; t < scaled.rows(); ++t) scaled(t, 0) *= 7.0;
  const Matrix a = clip_l2_per_dimension(seq);
  const Matrix b = clip_l2_per_dimension(scaled);
  for (std::size_t t = 0; t < a.rows(); ++t)
    CHECK(a(t, 0) == doctest::Approx(b(t, 0)).epsilon(1e-12));
}
