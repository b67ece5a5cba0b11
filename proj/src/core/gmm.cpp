#include "core/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace genseg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
constexpr double kMinVariance = 1e-10;             // absolute backstop
constexpr double kEmptyComponentMass = 1e-8;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

// k-means++ seeding followed by a fixed number of Lloyd iterations.
Matrix kmeans_centers(const Matrix& samples, std::size_t k, Rng& rng) {
  const std::size_t n = samples.rows(), dim = samples.cols();
  Matrix centers(k, dim);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());

  std::size_t first = static_cast<std::size_t>(rng.below(n));
  std::copy_n(samples.row(first).data(), dim, centers.row(0).data());
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], squared_distance(samples.row(i), centers.row(c - 1)));
    double total = 0.0;
    for (double v : dist2) total += v;
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.below(n));  // all points coincide with centers
    } else {
      double u = rng.uniform01() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        u -= dist2[i];
        if (u < 0.0) { pick = i; break; }
      }
    }
    std::copy_n(samples.row(pick).data(), dim, centers.row(c).data());
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 10; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d2 = squared_distance(samples.row(i), centers.row(c));
        if (d2 < best) { best = d2; arg = c; }
      }
      assign[i] = arg;
    }
    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[assign[i]]++;
      auto row = samples.row(i);
      auto acc = sums.row(assign[i]);
      for (std::size_t d = 0; d < dim; ++d) acc[d] += row[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // relocate to the sample farthest from its center
        double far = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double d2 = squared_distance(samples.row(i), centers.row(assign[i]));
          if (d2 > far) { far = d2; pick = i; }
        }
        std::copy_n(samples.row(pick).data(), dim, centers.row(c).data());
        continue;
      }
      auto acc = sums.row(c);
      auto ctr = centers.row(c);
      for (std::size_t d = 0; d < dim; ++d) ctr[d] = acc[d] / static_cast<double>(counts[c]);
    }
  }
  return centers;
}

struct SuffStats {
  std::vector<double> mass;   // K
  Matrix mean_acc;            // K x D, sum gamma * x
  Matrix var_acc;             // K x D, sum gamma * x^2
  double log_likelihood = 0.0;
  // farthest sample from its dominant component, for empty re-seeding
  double far_dist2 = -1.0;
  std::size_t far_index = 0;

  SuffStats(std::size_t k, std::size_t dim)
      : mass(k, 0.0), mean_acc(k, dim), var_acc(k, dim) {}

  void merge(const SuffStats& o) {
    for (std::size_t c = 0; c < mass.size(); ++c) mass[c] += o.mass[c];
    for (std::size_t i = 0; i < mean_acc.storage().size(); ++i) {
      mean_acc.storage()[i] += o.mean_acc.storage()[i];
      var_acc.storage()[i] += o.var_acc.storage()[i];
    }
    log_likelihood += o.log_likelihood;
    if (o.far_dist2 > far_dist2) {
      far_dist2 = o.far_dist2;
      far_index = o.far_index;
    }
  }
};

}  // namespace

void DiagonalGmm::validate() const {
  require(components() >= 1, "GMM needs at least one component");
  require(dim() >= 1, "GMM needs at least one dimension");
  require(means.rows() == components() && variances.rows() == components() &&
              variances.cols() == dim(),
          "GMM parameter shapes disagree");
  double total = 0.0;
  for (double w : weights) {
    require(w > 0.0, "GMM weights must be strictly positive");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-10, "GMM weights must sum to 1");
  for (double v : variances.storage())
    require(v > 0.0, "GMM variances must be positive");
}

double log_gaussian(const DiagonalGmm& gmm, std::size_t k, std::span<const double> x) {
  auto mu = gmm.means.row(k);
  auto var = gmm.variances.row(k);
  double acc = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mu[d];
    acc += std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * (acc + static_cast<double>(x.size()) * kLog2Pi);
}

namespace {

// log w_k + log N(x; k) for all k, plus the log-sum-exp total.
double component_log_joint(const DiagonalGmm& gmm, std::span<const double> x,
                           std::span<const double> log_weights, std::vector<double>& out) {
  const std::size_t k = gmm.components();
  out.resize(k);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    out[c] = log_weights[c] + log_gaussian(gmm, c, x);
    best = std::max(best, out[c]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) sum += std::exp(out[c] - best);
  return best + std::log(sum);
}

std::vector<double> log_of(std::span<const double> w) {
  std::vector<double> lw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) lw[i] = std::log(w[i]);
  return lw;
}

}  // namespace

std::vector<double> posteriors(const DiagonalGmm& gmm, std::span<const double> x) {
  require(x.size() == gmm.dim(), "posteriors: dimension mismatch");
  for (double v : x) require(std::isfinite(v), "posteriors: non-finite input");
  std::vector<double> lj;
  const auto lw = log_of(gmm.weights);
  const double lse = component_log_joint(gmm, x, lw, lj);
  std::vector<double> out(gmm.components());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::exp(lj[c] - lse);
  return out;
}

double log_likelihood(const DiagonalGmm& gmm, std::span<const double> x) {
  require(x.size() == gmm.dim(), "log_likelihood: dimension mismatch");
  for (double v : x) require(std::isfinite(v), "log_likelihood: non-finite input");
  std::vector<double> lj;
  const auto lw = log_of(gmm.weights);
  return component_log_joint(gmm, x, lw, lj);
}

std::vector<double> column_variances(const Matrix& samples) {
  const std::size_t n = samples.rows(), dim = samples.cols();
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
  }
  for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = row[d] - mean[d];
      var[d] += diff * diff;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) var[d] /= static_cast<double>(n);
  return var;
}

DiagonalGmm fit_single_gaussian(const Matrix& samples, std::span<const double> floor) {
  require(samples.rows() >= 1, "fit_single_gaussian: empty sample set");
  const std::size_t n = samples.rows(), dim = samples.cols();
  DiagonalGmm g;
  g.weights = {1.0};
  g.means = Matrix(1, dim);
  g.variances = Matrix(1, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < dim; ++d) g.means(0, d) += row[d];
  }
  for (std::size_t d = 0; d < dim; ++d) g.means(0, d) /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = samples.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = row[d] - g.means(0, d);
      g.variances(0, d) += diff * diff;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    double v = g.variances(0, d) / static_cast<double>(n);
    g.variances(0, d) = std::max({v, floor[d], kMinVariance});
  }
  return g;
}

GmmFitResult fit_gmm(const Matrix& samples, std::size_t k, const GmmFitConfig& config) {
  const std::size_t n = samples.rows(), dim = samples.cols();
  require(k >= 1, "fit_gmm: k must be >= 1");
  require(n >= k, "fit_gmm: fewer samples than components");
  require(samples.all_finite(), "fit_gmm: non-finite sample values");

  const auto global_var = column_variances(samples);
  std::vector<double> floor(dim);
  for (std::size_t d = 0; d < dim; ++d)
    floor[d] = std::max(config.variance_floor * global_var[d], kMinVariance);

  Rng rng(config.seed);
  DiagonalGmm gmm;
  gmm.means = kmeans_centers(samples, k, rng);
  gmm.variances = Matrix(k, dim);
  gmm.weights.assign(k, 1.0 / static_cast<double>(k));

  // initial covariances: per-cluster sample variance around the k-means centers
  {
    std::vector<std::size_t> counts(k, 0);
    std::vector<std::size_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d2 = squared_distance(samples.row(i), gmm.means.row(c));
        if (d2 < best) { best = d2; arg = c; }
      }
      assign[i] = arg;
      counts[arg]++;
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto row = samples.row(i);
      auto mu = gmm.means.row(assign[i]);
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = row[d] - mu[d];
        gmm.variances(assign[i], d) += diff * diff;
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = counts[c] > 0 ? gmm.variances(c, d) / static_cast<double>(counts[c])
                                 : global_var[d];
        gmm.variances(c, d) = std::max(v, floor[d]);
      }
      gmm.weights[c] = counts[c] > 0
                           ? static_cast<double>(counts[c]) / static_cast<double>(n)
                           : 1.0 / static_cast<double>(n);
    }
    double wsum = 0.0;
    for (double w : gmm.weights) wsum += w;
    for (double& w : gmm.weights) w /= wsum;
  }

  GmmFitResult result;
  double prev_ll = -std::numeric_limits<double>::infinity();
  const std::size_t n_blocks = (n + kDefaultBlock - 1) / kDefaultBlock;

  for (std::uint32_t iter = 0; iter < config.max_iters; ++iter) {
    // E-step: per-block sufficient statistics, merged in block order so the
    // result is bit-identical for every thread count.
    std::vector<SuffStats> block_stats(n_blocks, SuffStats(k, dim));
    const auto lw = log_of(gmm.weights);
    for_each_block(n, kDefaultBlock, config.threads,
                   [&](std::size_t b, std::size_t begin, std::size_t end) {
      SuffStats& st = block_stats[b];
      std::vector<double> lj(k), gamma(k);
      for (std::size_t i = begin; i < end; ++i) {
        auto x = samples.row(i);
        const double lse = component_log_joint(gmm, x, lw, lj);
        st.log_likelihood += lse;
        std::size_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
          gamma[c] = std::exp(lj[c] - lse);
          if (gamma[c] > gamma[arg]) arg = c;
        }
        const double d2 = squared_distance(x, gmm.means.row(arg));
        if (d2 > st.far_dist2) {
          st.far_dist2 = d2;
          st.far_index = i;
        }
        for (std::size_t c = 0; c < k; ++c) {
          if (gamma[c] <= 0.0) continue;
          st.mass[c] += gamma[c];
          auto macc = st.mean_acc.row(c);
          auto vacc = st.var_acc.row(c);
          for (std::size_t d = 0; d < dim; ++d) {
            macc[d] += gamma[c] * x[d];
            vacc[d] += gamma[c] * x[d] * x[d];
          }
        }
      }
    });
    SuffStats total(k, dim);
    for (const auto& st : block_stats) total.merge(st);

    const double mean_ll = total.log_likelihood / static_cast<double>(n);
    result.log_likelihood_trace.push_back(mean_ll);
    result.iterations = iter + 1;

    // M-step
    for (std::size_t c = 0; c < k; ++c) {
      if (total.mass[c] < kEmptyComponentMass) {
        // re-seed a starved component from the farthest sample
        auto x = samples.row(total.far_index);
        for (std::size_t d = 0; d < dim; ++d) {
          gmm.means(c, d) = x[d];
          gmm.variances(c, d) = std::max(global_var[d], floor[d]);
        }
        gmm.weights[c] = 1.0 / static_cast<double>(n);
        continue;
      }
      gmm.weights[c] = total.mass[c] / static_cast<double>(n);
      for (std::size_t d = 0; d < dim; ++d) {
        const double mu = total.mean_acc(c, d) / total.mass[c];
        const double ex2 = total.var_acc(c, d) / total.mass[c];
        gmm.means(c, d) = mu;
        gmm.variances(c, d) = std::max(ex2 - mu * mu, floor[d]);
      }
    }
    double wsum = 0.0;
    for (double w : gmm.weights) wsum += w;
    for (double& w : gmm.weights) w /= wsum;

    if (mean_ll - prev_ll < config.tol && iter > 0) break;
    prev_ll = mean_ll;
  }

  result.model = std::move(gmm);
  result.model.validate();
  return result;
}

Matrix sample_gmm(const DiagonalGmm& gmm, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "sample_gmm: n must be >= 1");
  Rng rng(seed);
  const std::size_t dim = gmm.dim();
  Matrix out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.discrete(gmm.weights);
    auto row = out.row(i);
    for (std::size_t d = 0; d < dim; ++d)
      row[d] = rng.normal(gmm.means(c, d), std::sqrt(gmm.variances(c, d)));
  }
  return out;
}

}  // namespace genseg
