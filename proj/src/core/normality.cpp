#include "core/normality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace genseg {

namespace {

constexpr std::size_t kMinSamples = 8;
constexpr std::size_t kSimsPerBucket = 10000;
constexpr std::uint64_t kTableSeed = 0x4c494c4c49454653ull;  // "LILLIEFS"
constexpr char kCacheMagic[8] = {'G', 'S', 'L', 'T', '1', '\n', 0, 0};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<std::size_t> bucket_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t n = kMinSamples; n <= 50; ++n) sizes.push_back(n);
  double n = 50.0;
  for (;;) {
    n = std::round(n * 1.25);
    if (n > 5600.0) break;
    sizes.push_back(static_cast<std::size_t>(n));
  }
  return sizes;
}

double ks_statistic_standardized(std::vector<double>& sorted_std) {
  const std::size_t n = sorted_std.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = normal_cdf(sorted_std[i]);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - cdf;
    const double lo = cdf - static_cast<double>(i) / static_cast<double>(n);
    d = std::max({d, hi, lo});
  }
  return d;
}

bool is_constant(std::span<const double> samples) {
  for (double v : samples)
    if (v != samples[0]) return false;
  return true;
}

// statistic of one sample: standardize by its own mean/std (ddof = 1), sort,
// take the two-sided KS distance against the standard normal CDF
std::optional<double> lilliefors_stat_impl(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (is_constant(samples)) return std::nullopt;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  if (ss <= 0.0) return std::nullopt;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (samples[i] - mean) / sd;
  std::sort(z.begin(), z.end());
  return ks_statistic_standardized(z);
}

class LillieforsTable {
public:
  static LillieforsTable& instance() {
    static LillieforsTable table;
    return table;
  }

  void set_cache_dir(const std::string& dir) {
    std::lock_guard lock(mutex_);
    cache_dir_ = dir;
    cache_dir_set_ = true;
  }

  double p_value(double statistic, std::size_t n) {
    ensure_built();
    const auto& sizes = sizes_;
    if (n >= sizes.back()) {
      // beyond the largest bucket the statistic scales as 1/sqrt(n)
      const double scaled =
          statistic * std::sqrt(static_cast<double>(n) / static_cast<double>(sizes.back()));
      return bucket_p(sizes.size() - 1, scaled);
    }
    auto it = std::lower_bound(sizes.begin(), sizes.end(), n);
    const std::size_t hi = static_cast<std::size_t>(it - sizes.begin());
    if (sizes[hi] == n || hi == 0) return bucket_p(hi, statistic);
    const std::size_t lo = hi - 1;
    const double w = (static_cast<double>(n) - static_cast<double>(sizes[lo])) /
                     (static_cast<double>(sizes[hi]) - static_cast<double>(sizes[lo]));
    return (1.0 - w) * bucket_p(lo, statistic) + w * bucket_p(hi, statistic);
  }

private:
  LillieforsTable() = default;

  std::string default_cache_dir() const {
    if (const char* env = std::getenv("GENSEG_CACHE")) return env;
    if (const char* home = std::getenv("HOME"))
      return std::string(home) + "/.cache/genseg";
    return std::filesystem::temp_directory_path().string() + "/genseg-cache";
  }

  std::filesystem::path cache_file() const {
    return std::filesystem::path(cache_dir_) / "lilliefors-mc-v1.bin";
  }

  void ensure_built() {
    std::call_once(built_, [this] {
      sizes_ = bucket_sizes();
      {
        std::lock_guard lock(mutex_);
        if (!cache_dir_set_) cache_dir_ = default_cache_dir();
      }
      if (!cache_dir_.empty() && load_cache()) return;
      build();
      if (!cache_dir_.empty()) save_cache();
    });
  }

  void build() {
    table_.assign(sizes_.size(), {});
    for_each_block(sizes_.size(), 1, resolve_threads(0),
                   [this](std::size_t b, std::size_t, std::size_t) {
      const std::size_t n = sizes_[b];
      Rng rng(mix_seed(kTableSeed, b));
      std::vector<double> stats(kSimsPerBucket);
      std::vector<double> sample(n);
      for (std::size_t s = 0; s < kSimsPerBucket; ++s) {
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng.normal();
        stats[s] = lilliefors_stat_impl(sample).value();
      }
      std::sort(stats.begin(), stats.end());
      table_[b] = std::move(stats);
    });
  }

  bool load_cache() {
    std::ifstream in(cache_file(), std::ios::binary);
    if (!in) return false;
    char magic[8];
    std::uint64_t seed = 0;
    std::uint32_t n_buckets = 0, sims = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&n_buckets), sizeof(n_buckets));
    in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
    in.read(reinterpret_cast<char*>(&sims), sizeof(sims));
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || seed != kTableSeed ||
        n_buckets != sizes_.size() || sims != kSimsPerBucket)
      return false;
    table_.assign(sizes_.size(), {});
    for (std::size_t b = 0; b < sizes_.size(); ++b) {
      std::uint32_t n = 0;
      in.read(reinterpret_cast<char*>(&n), sizeof(n));
      if (!in || n != sizes_[b]) return false;
      table_[b].resize(kSimsPerBucket);
      in.read(reinterpret_cast<char*>(table_[b].data()),
              static_cast<std::streamsize>(kSimsPerBucket * sizeof(double)));
      if (!in) return false;
    }
    return true;
  }

  void save_cache() const {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
    if (ec) return;
    const auto tmp = cache_file().string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) return;
      const std::uint32_t n_buckets = static_cast<std::uint32_t>(sizes_.size());
      const std::uint32_t sims = kSimsPerBucket;
      out.write(kCacheMagic, 8);
      out.write(reinterpret_cast<const char*>(&n_buckets), sizeof(n_buckets));
      out.write(reinterpret_cast<const char*>(&kTableSeed), sizeof(kTableSeed));
      out.write(reinterpret_cast<const char*>(&sims), sizeof(sims));
      for (std::size_t b = 0; b < sizes_.size(); ++b) {
        const std::uint32_t n = static_cast<std::uint32_t>(sizes_[b]);
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(table_[b].data()),
                  static_cast<std::streamsize>(kSimsPerBucket * sizeof(double)));
      }
    }
    std::error_code rc;
    std::filesystem::rename(tmp, cache_file(), rc);
  }

  // upper-tail probability from the sorted simulated statistics,
  // linearly interpolated between order statistics
  double bucket_p(std::size_t b, double statistic) const {
    const auto& s = table_[b];
    if (statistic <= s.front()) return 1.0;
    if (statistic >= s.back()) return 0.0;
    const auto it = std::lower_bound(s.begin(), s.end(), statistic);
    const std::size_t hi = static_cast<std::size_t>(it - s.begin());
    const std::size_t lo = hi - 1;
    const double w = (statistic - s[lo]) / (s[hi] - s[lo]);
    const double rank = static_cast<double>(lo) + w;
    return 1.0 - rank / static_cast<double>(s.size() - 1);
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::vector<double>> table_;
  std::string cache_dir_;
  bool cache_dir_set_ = false;
  std::mutex mutex_;
  std::once_flag built_;
};

}  // namespace

void set_lilliefors_cache_dir(const std::string& dir) {
  LillieforsTable::instance().set_cache_dir(dir);
}

NormalityTestResult jarque_bera(std::span<const double> samples, double alpha) {
  const std::size_t n = samples.size();
  require(n >= kMinSamples, "jarque_bera: need at least 8 samples");
  require(alpha > 0.0 && alpha < 1.0, "jarque_bera: alpha must be in (0, 1)");
  NormalityTestResult r;
  if (is_constant(samples)) {
    r.degenerate = true;
    return r;
  }
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 <= 0.0) {
    r.degenerate = true;
    return r;
  }
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);  // non-excess convention, normal = 3
  r.statistic = static_cast<double>(n) / 6.0 *
                (skew * skew + (kurt - 3.0) * (kurt - 3.0) / 4.0);
  r.p_value = std::exp(-r.statistic / 2.0);  // chi-square survival, 2 dof
  r.pass = r.p_value > alpha;
  return r;
}

double lilliefors_statistic(std::span<const double> samples) {
  require(samples.size() >= 2, "lilliefors_statistic: need at least 2 samples");
  auto stat = lilliefors_stat_impl(samples);
  require(stat.has_value(), "lilliefors_statistic: constant sample");
  return *stat;
}

NormalityTestResult lilliefors(std::span<const double> samples, double alpha) {
  const std::size_t n = samples.size();
  require(n >= kMinSamples, "lilliefors: need at least 8 samples");
  require(alpha > 0.0 && alpha < 1.0, "lilliefors: alpha must be in (0, 1)");
  NormalityTestResult r;
  const auto stat = lilliefors_stat_impl(samples);
  if (!stat) {
    r.degenerate = true;
    return r;
  }
  r.statistic = *stat;
  r.p_value = LillieforsTable::instance().p_value(r.statistic, n);
  r.pass = r.p_value > alpha;
  return r;
}

NormalityReport dimension_pass_report(const Matrix& data, std::span<const double> alphas,
                                      std::size_t samples_per_dim, std::uint64_t seed,
                                      std::uint32_t threads) {
  require(data.rows() >= kMinSamples, "dimension_pass_report: too few rows");
  require(!alphas.empty(), "dimension_pass_report: no significance levels");
  for (double a : alphas)
    require(a > 0.0 && a < 1.0, "dimension_pass_report: alpha must be in (0, 1)");
  require(samples_per_dim >= kMinSamples && samples_per_dim <= data.rows(),
          "dimension_pass_report: samples_per_dim out of range");

  const std::size_t dims = data.cols();
  // trigger table construction once, outside the worker threads
  LillieforsTable::instance().p_value(0.5, samples_per_dim);

  std::vector<double> lil_p(dims), jb_p(dims);
  std::vector<char> lil_deg(dims, 0), jb_deg(dims, 0);
  for_each_block(dims, 4, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      Rng rng(mix_seed(seed, d));
      const auto rows = rng.sample_without_replacement(data.rows(), samples_per_dim);
      std::vector<double> column(samples_per_dim);
      for (std::size_t i = 0; i < samples_per_dim; ++i) column[i] = data(rows[i], d);
      const auto lil = lilliefors(column, 0.5);
      const auto jb = jarque_bera(column, 0.5);
      lil_p[d] = lil.p_value;
      jb_p[d] = jb.p_value;
      lil_deg[d] = lil.degenerate ? 1 : 0;
      jb_deg[d] = jb.degenerate ? 1 : 0;
    }
  });

  NormalityReport report;
  report.alphas.assign(alphas.begin(), alphas.end());
  report.dims = dims;
  report.samples_per_dim = samples_per_dim;
  for (double alpha : alphas) {
    std::size_t lil_pass = 0, jb_pass = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      if (!lil_deg[d] && lil_p[d] > alpha) ++lil_pass;
      if (!jb_deg[d] && jb_p[d] > alpha) ++jb_pass;
    }
    report.lilliefors_pass.push_back(static_cast<double>(lil_pass) /
                                     static_cast<double>(dims));
    report.jarque_bera_pass.push_back(static_cast<double>(jb_pass) /
                                      static_cast<double>(dims));
  }
  return report;
}

std::string NormalityReport::to_csv() const {
  std::string out = "test,alpha,fraction_pass,n_dims,samples_per_dim\n";
  char line[160];
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    std::snprintf(line, sizeof(line), "lilliefors,%.17g,%.17g,%zu,%zu\n", alphas[i],
                  lilliefors_pass[i], dims, samples_per_dim);
    out += line;
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    std::snprintf(line, sizeof(line), "jarque_bera,%.17g,%.17g,%zu,%zu\n", alphas[i],
                  jarque_bera_pass[i], dims, samples_per_dim);
    out += line;
  }
  return out;
}

}  // namespace genseg
