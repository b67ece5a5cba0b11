#include <doctest.h>

#include <cmath>

#include "core/gmm.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace genseg;

namespace {

Matrix two_cluster_sample(std::size_t n_per, Rng& rng) {
  Matrix samples(2 * n_per, 2);
  for (std::size_t i = 0; i < n_per; ++i) {
    samples(i, 0) = rng.normal(-5.0, 1.0);
    samples(i, 1) = rng.normal(-5.0, 1.0);
    samples(n_per + i, 0) = rng.normal(5.0, 1.0);
    samples(n_per + i, 1) = rng.normal(5.0, 1.0);
  }
  return samples;
}

}  // namespace

TEST_CASE("fit_gmm with k=1 is the closed-form Gaussian fit") {
  Rng rng(11);
  const Matrix samples = oracle::random_matrix(200, 3, rng, 2.0);
  GmmFitConfig cfg;
  cfg.seed = 5;
  const auto fit = fit_gmm(samples, 1, cfg);

  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < samples.rows(); ++i)
    for (std::size_t d = 0; d < 3; ++d) mean[d] += samples(i, d);
  for (auto& m : mean) m /= static_cast<double>(samples.rows());
  const auto var = column_variances(samples);

  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(fit.model.means(0, d) == doctest::Approx(mean[d]).epsilon(1e-12));
    CHECK(fit.model.variances(0, d) == doctest::Approx(var[d]).epsilon(1e-9));
  }
  CHECK(fit.model.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_gmm recovers two well-separated clusters") {
  Rng rng(21);
  const Matrix samples = two_cluster_sample(400, rng);
  GmmFitConfig cfg;
  cfg.seed = 9;
  const auto fit = fit_gmm(samples, 2, cfg);

  // identify components by the sign of the first mean coordinate
  const std::size_t neg = fit.model.means(0, 0) < 0 ? 0 : 1;
  const std::size_t pos = 1 - neg;
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(std::abs(fit.model.means(neg, d) - (-5.0)) < 0.2);
    CHECK(std::abs(fit.model.means(pos, d) - 5.0) < 0.2);
  }
}

TEST_CASE("EM log-likelihood trace is monotone on random instances") {
  for (std::uint64_t instance = 0; instance < 50; ++instance) {
    Rng rng(1000 + instance);
    const std::size_t k = 1 + instance % 4;
    const std::size_t dim = 1 + instance % 3;
    const Matrix samples = oracle::random_matrix(60 + instance, dim, rng, 1.5);
    GmmFitConfig cfg;
    cfg.seed = instance;
    cfg.max_iters = 30;
    cfg.tol = 0.0;
    const auto fit = fit_gmm(samples, k, cfg);
    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i)
      CHECK(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("fitted variances respect the floor") {
  Rng rng(33);
  Matrix samples = oracle::random_matrix(100, 2, rng);
  for (std::size_t i = 0; i < samples.rows(); ++i) samples(i, 1) = 4.2;  // constant dim
  GmmFitConfig cfg;
  cfg.seed = 1;
  const auto fit = fit_gmm(samples, 2, cfg);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < 2; ++d) CHECK(fit.model.variances(c, d) > 0.0);
}

TEST_CASE("fit_gmm is deterministic, including under threads") {
  Rng rng(44);
  const Matrix samples = oracle::random_matrix(500, 3, rng);
  GmmFitConfig cfg;
  cfg.seed = 7;
  const auto a = fit_gmm(samples, 3, cfg);
  const auto b = fit_gmm(samples, 3, cfg);
  cfg.threads = 4;
  const auto c = fit_gmm(samples, 3, cfg);
  CHECK(a.model.means == b.model.means);
  CHECK(a.model.variances == b.model.variances);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.means == c.model.means);
  CHECK(a.model.variances == c.model.variances);
  CHECK(a.model.weights == c.model.weights);
}

TEST_CASE("fit_gmm input validation") {
  Matrix tiny(2, 2);
  tiny(0, 0) = 1.0;
  tiny(1, 1) = 2.0;
  CHECK_THROWS_AS(fit_gmm(tiny, 3, {}), Error);

  Matrix bad(4, 2, 1.0);
  bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_gmm(bad, 2, {}), Error);
}

TEST_CASE("posteriors: single component and dominant component") {
  Rng rng(55);
  const auto single = oracle::random_gmm(1, 2, rng);
  const std::vector<double> x = {0.3, -0.7};
  const auto g1 = posteriors(single, x);
  CHECK(g1.size() == 1);
  CHECK(g1[0] == doctest::Approx(1.0));

  DiagonalGmm far;
  far.weights = {0.5, 0.5};
  far.means = Matrix(2, 1);
  far.means(0, 0) = 0.0;
  far.means(1, 0) = 20.0;  // 20 sigma away
  far.variances = Matrix(2, 1, 1.0);
  const std::vector<double> at_mu = {0.0};
  const auto g2 = posteriors(far, at_mu);
  CHECK(g2[0] > 1.0 - 1e-12);
}

TEST_CASE("posteriors match the naive density-ratio oracle") {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(600 + instance);
    const auto gmm = oracle::random_gmm(3, 2, rng);
    std::vector<double> x = {rng.normal(), rng.normal()};
    const auto fast = posteriors(gmm, x);
    const auto naive = oracle::naive_posteriors(gmm, x);
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(std::abs(fast[c] - naive[c]) < 1e-12);
      sum += fast[c];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("posteriors dimension mismatch") {
  Rng rng(66);
  const auto gmm = oracle::random_gmm(2, 3, rng);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(posteriors(gmm, x), Error);
}

TEST_CASE("log_likelihood: standard normal peak and degenerate mixture") {
  DiagonalGmm std_normal;
  std_normal.weights = {1.0};
  std_normal.means = Matrix(1, 1);
  std_normal.variances = Matrix(1, 1, 1.0);
  const std::vector<double> zero = {0.0};
  CHECK(log_likelihood(std_normal, zero) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));

  // equal-weight identical components score like the single component
  DiagonalGmm twin;
  twin.weights = {0.5, 0.5};
  twin.means = Matrix(2, 1, 0.7);
  twin.variances = Matrix(2, 1, 1.3);
  const std::vector<double> x = {0.2};
  DiagonalGmm one = twin;
  one.weights = {1.0};
  one.means = Matrix(1, 1, 0.7);
  one.variances = Matrix(1, 1, 1.3);
  CHECK(log_likelihood(twin, x) == doctest::Approx(log_likelihood(one, x)).epsilon(1e-14));
}

TEST_CASE("log_likelihood matches direct summation") {
  for (std::uint64_t instance = 0; instance < 20; ++instance) {
    Rng rng(700 + instance);
    const auto gmm = oracle::random_gmm(3, 2, rng);
    std::vector<double> x = {rng.normal(), rng.normal()};
    CHECK(std::abs(log_likelihood(gmm, x) - std::log(oracle::naive_density(gmm, x))) <
          1e-10);
  }
}

TEST_CASE("sample_gmm moments, determinism, and component frequencies") {
  DiagonalGmm g;
  g.weights = {1.0};
  g.means = Matrix(1, 1, 3.0);
  g.variances = Matrix(1, 1, 4.0);
  const Matrix draws = sample_gmm(g, 10000, 99);
  double mean = 0.0;
  for (std::size_t i = 0; i < draws.rows(); ++i) mean += draws(i, 0);
  mean /= static_cast<double>(draws.rows());
  double var = 0.0;
  for (std::size_t i = 0; i < draws.rows(); ++i)
    var += (draws(i, 0) - mean) * (draws(i, 0) - mean);
  var /= static_cast<double>(draws.rows());
  CHECK(std::abs(mean - 3.0) < 0.1);
  CHECK(std::abs(var - 4.0) < 0.2);

  CHECK(sample_gmm(g, 100, 5) == sample_gmm(g, 100, 5));

  DiagonalGmm two;
  two.weights = {0.3, 0.7};
  two.means = Matrix(2, 1);
  two.means(0, 0) = -50.0;
  two.means(1, 0) = 50.0;
  two.variances = Matrix(2, 1, 1.0);
  const std::size_t n = 20000;
  const Matrix d2 = sample_gmm(two, n, 123);
  std::size_t first = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d2(i, 0) < 0.0) ++first;
  const double sd = std::sqrt(0.3 * 0.7 * static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(first) - 0.3 * n) < 3.0 * sd);
}
