#include <doctest.h>

#include <cmath>

#include "core/fisher.hpp"
#include "core/normality.hpp"
#include "core/pca.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace genseg;

TEST_CASE("jarque_bera is exactly zero on a zero-skew, kurtosis-3 sample") {
  // two symmetric pairs plus zeros; v solves 4(1+v^2) = 3(1+v)^2
  const double v = 3.0 - 2.0 * std::sqrt(2.0);
  const double b = std::sqrt(v);
  const std::vector<double> sample = {1.0, -1.0, b, -b, 0.0, 0.0, 0.0, 0.0};
  const auto r = jarque_bera(sample, 0.05);
  CHECK(r.statistic < 1e-20);
  CHECK(r.p_value > 1.0 - 1e-10);
  CHECK(r.pass);
}

TEST_CASE("jarque_bera rejects a large uniform sample at alpha 0.001") {
  Rng rng(1);
  std::vector<double> sample(10000);
  for (auto& x : sample) x = rng.uniform01();
  const auto r = jarque_bera(sample, 0.001);
  CHECK_FALSE(r.pass);  // kurtosis of the uniform is 1.8
}

TEST_CASE("jarque_bera false-rejection rate is calibrated at n=10000") {
  Rng rng(2);
  std::size_t rejections = 0;
  std::vector<double> sample(10000);
  for (int rep = 0; rep < 500; ++rep) {
    for (auto& x : sample) x = rng.normal();
    if (!jarque_bera(sample, 0.05).pass) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / 500.0;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("constant samples are degenerate and counted as rejections") {
  const std::vector<double> flat(20, 3.3);
  const auto jb = jarque_bera(flat, 0.05);
  CHECK(jb.degenerate);
  CHECK_FALSE(jb.pass);
  const auto lil = lilliefors(flat, 0.05);
  CHECK(lil.degenerate);
  CHECK_FALSE(lil.pass);
}

TEST_CASE("normality tests require at least 8 samples") {
  const std::vector<double> tiny = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(jarque_bera(tiny, 0.05), Error);
  CHECK_THROWS_AS(lilliefors(tiny, 0.05), Error);
}

TEST_CASE("lilliefors statistic matches the brute-force double loop") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> sample(50);
    for (auto& x : sample) x = rng.normal(1.0, 2.0);
    CHECK(std::abs(lilliefors_statistic(sample) -
                   oracle::naive_lilliefors_statistic(sample)) < 1e-12);
  }
}

TEST_CASE("lilliefors false-rejection rate is calibrated at n=5000") {
  Rng rng(4);
  std::size_t rejections = 0;
  std::vector<double> sample(5000);
  for (int rep = 0; rep < 500; ++rep) {
    for (auto& x : sample) x = rng.normal();
    if (!lilliefors(sample, 0.05).pass) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / 500.0;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("lilliefors rejects a strongly skewed alternative") {
  Rng rng(5);
  std::vector<double> sample(2000);
  for (auto& x : sample) x = -std::log(1.0 - rng.uniform01());  // exponential(1)
  const auto r = lilliefors(sample, 0.01);
  CHECK_FALSE(r.pass);
}

TEST_CASE("dimension_pass_report is calibrated on i.i.d. normal data") {
  // enough samples per dimension that the chi-square approximation behind
  // Jarque-Bera has settled
  Rng rng(6);
  const Matrix data = oracle::random_matrix(2500, 100, rng);
  const std::vector<double> alphas = {0.5, 0.05, 0.001};
  const auto report = dimension_pass_report(data, alphas, 2000, 11);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    CHECK(report.lilliefors_pass[i] >= 1.0 - 2.0 * alphas[i] - 0.02);
    CHECK(report.jarque_bera_pass[i] >= 1.0 - 2.0 * alphas[i] - 0.02);
  }
}

TEST_CASE("pass fractions grow as alpha decreases") {
  Rng rng(7);
  Matrix data(600, 12);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t d = 0; d < data.cols(); ++d)
      data(i, d) = d % 2 == 0 ? rng.normal() : rng.uniform01();  // half non-normal
  const std::vector<double> alphas = {0.5, 0.05, 0.001};
  const auto report = dimension_pass_report(data, alphas, 300, 13);
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    CHECK(report.lilliefors_pass[i] >= report.lilliefors_pass[i - 1]);
    CHECK(report.jarque_bera_pass[i] >= report.jarque_bera_pass[i - 1]);
  }
}

TEST_CASE("report is deterministic in the seed and thread count") {
  Rng rng(8);
  const Matrix data = oracle::random_matrix(300, 8, rng);
  const std::vector<double> alphas = {0.1, 0.01};
  const auto a = dimension_pass_report(data, alphas, 200, 21, 1);
  const auto b = dimension_pass_report(data, alphas, 200, 21, 4);
  CHECK(a.lilliefors_pass == b.lilliefors_pass);
  CHECK(a.jarque_bera_pass == b.jarque_bera_pass);
  CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("PCA-reduced Fisher vectors pass normality more often than raw ones") {
  // frame data from a mixture source, encoded over sliding windows
  Rng rng(9);
  const auto source = oracle::random_gmm(5, 4, rng, 4.0);
  const auto codebook_fit = [&] {
    const Matrix pool = sample_gmm(source, 4000, 31);
    GmmFitConfig cfg;
    cfg.seed = 17;
    return fit_gmm(pool, 12, cfg);
  }();
  const DiagonalGmm& codebook = codebook_fit.model;

  std::vector<Matrix> encoded;
  std::size_t total_rows = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const Matrix seq = sample_gmm(source, 160, 100 + s);
    encoded.push_back(sliding_window_encode(codebook, seq, 20));
    total_rows += encoded.back().rows();
  }
  Matrix raw(total_rows, fisher_dim(codebook));
  std::size_t at = 0;
  for (const auto& e : encoded) {
    std::copy(e.storage().begin(), e.storage().end(), raw.data() + at * raw.cols());
    at += e.rows();
  }

  const auto pca = fit_pca(raw, 10, true);
  const Matrix reduced = project_rows(pca, raw);

  const std::vector<double> alphas = {0.01};
  const std::size_t per_dim = std::min<std::size_t>(1000, raw.rows());
  const auto raw_report = dimension_pass_report(raw, alphas, per_dim, 3);
  const auto red_report = dimension_pass_report(reduced, alphas, per_dim, 3);
  CHECK(red_report.lilliefors_pass[0] > raw_report.lilliefors_pass[0]);
}

TEST_CASE("report CSV format") {
  NormalityReport report;
  report.alphas = {0.5, 0.01};
  report.lilliefors_pass = {0.25, 0.75};
  report.jarque_bera_pass = {0.5, 1.0};
  report.dims = 4;
  report.samples_per_dim = 100;
  const std::string csv = report.to_csv();
  CHECK(csv.rfind("test,alpha,fraction_pass,n_dims,samples_per_dim\n", 0) == 0);
  CHECK(csv.find("lilliefors,0.5,0.25,4,100\n") != std::string::npos);
  CHECK(csv.find("jarque_bera,0.01,1,4,100\n") != std::string::npos);
}
