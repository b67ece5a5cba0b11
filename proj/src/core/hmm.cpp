#include "core/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace genseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInitSelf = 0.6;
constexpr double kInitNext = 0.4;
constexpr double kMinOccupancy = 1e-8;
constexpr double kMinVariance = 1e-10;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// chunk boundaries of a length-T segment split into S contiguous pieces;
// the remainder goes to the later states
std::vector<std::size_t> chunk_offsets(std::size_t t_len, std::size_t s_count) {
  const std::size_t base = t_len / s_count;
  const std::size_t rem = t_len - base * s_count;
  std::vector<std::size_t> offsets(s_count + 1, 0);
  for (std::size_t j = 0; j < s_count; ++j)
    offsets[j + 1] = offsets[j] + base + (j >= s_count - rem ? 1 : 0);
  return offsets;
}

Matrix pool_rows(const std::vector<Matrix>& segments) {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.rows();
  Matrix pooled(total, segments.front().cols());
  std::size_t at = 0;
  for (const auto& s : segments) {
    std::copy(s.storage().begin(), s.storage().end(), pooled.data() + at * pooled.cols());
    at += s.rows();
  }
  return pooled;
}

// per-(state, frame) emission log-probabilities
Matrix emission_table(const UnitHmm& hmm, const Matrix& seq) {
  const std::size_t s_count = hmm.state_count();
  Matrix logb(s_count, seq.rows());
  for (std::size_t j = 0; j < s_count; ++j)
    for (std::size_t t = 0; t < seq.rows(); ++t)
      logb(j, t) = log_likelihood(hmm.states[j], seq.row(t));
  return logb;
}

struct HmmStats {
  // transition expectations
  std::vector<double> self_count;   // S
  std::vector<double> next_count;   // S-1 (forward transitions)
  double exits = 0.0;               // one mandatory exit per segment
  // per (state, mixture component) emission statistics
  std::vector<std::vector<double>> mass;   // [S][M]
  std::vector<Matrix> mean_acc;            // [S] M x D
  std::vector<Matrix> var_acc;             // [S] M x D
  double log_likelihood = 0.0;
  std::size_t frames = 0;

  HmmStats(std::size_t s_count, std::size_t mixtures, std::size_t dim)
      : self_count(s_count, 0.0),
        next_count(s_count > 0 ? s_count - 1 : 0, 0.0),
        mass(s_count, std::vector<double>(mixtures, 0.0)),
        mean_acc(s_count, Matrix(mixtures, dim)),
        var_acc(s_count, Matrix(mixtures, dim)) {}

  void merge(const HmmStats& o) {
    for (std::size_t j = 0; j < self_count.size(); ++j) self_count[j] += o.self_count[j];
    for (std::size_t j = 0; j < next_count.size(); ++j) next_count[j] += o.next_count[j];
    exits += o.exits;
    for (std::size_t j = 0; j < mass.size(); ++j) {
      for (std::size_t m = 0; m < mass[j].size(); ++m) mass[j][m] += o.mass[j][m];
      for (std::size_t i = 0; i < mean_acc[j].storage().size(); ++i) {
        mean_acc[j].storage()[i] += o.mean_acc[j].storage()[i];
        var_acc[j].storage()[i] += o.var_acc[j].storage()[i];
      }
    }
    log_likelihood += o.log_likelihood;
    frames += o.frames;
  }
};

// forward-backward over one segment; accumulates expectations into `stats`
// and returns the segment log-likelihood
double accumulate_segment(const UnitHmm& hmm, const Matrix& seq, HmmStats& stats,
                          std::size_t mixtures) {
  const std::size_t s_count = hmm.state_count();
  const std::size_t t_len = seq.rows();
  const Matrix logb = emission_table(hmm, seq);

  std::vector<double> log_self(s_count), log_next(s_count);
  for (std::size_t j = 0; j < s_count; ++j) {
    log_self[j] = std::log(hmm.self_prob[j]);
    log_next[j] = std::log(hmm.next_prob[j]);
  }

  Matrix alpha(t_len, s_count, kNegInf);
  Matrix beta(t_len, s_count, kNegInf);
  alpha(0, 0) = logb(0, 0);
  for (std::size_t t = 1; t < t_len; ++t)
    for (std::size_t j = 0; j < s_count; ++j) {
      double a = alpha(t - 1, j) + log_self[j];
      if (j > 0) a = log_add(a, alpha(t - 1, j - 1) + log_next[j - 1]);
      alpha(t, j) = a + logb(j, t);
    }
  const double seg_ll = alpha(t_len - 1, s_count - 1) + log_next[s_count - 1];

  beta(t_len - 1, s_count - 1) = log_next[s_count - 1];  // mandatory exit
  for (std::size_t t = t_len - 1; t-- > 0;)
    for (std::size_t j = 0; j < s_count; ++j) {
      double b = log_self[j] + logb(j, t + 1) + beta(t + 1, j);
      if (j + 1 < s_count)
        b = log_add(b, log_next[j] + logb(j + 1, t + 1) + beta(t + 1, j + 1));
      beta(t, j) = b;
    }

  stats.log_likelihood += seg_ll;
  stats.frames += t_len;
  stats.exits += 1.0;

  std::vector<double> comp_lp(mixtures);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t j = 0; j < s_count; ++j) {
      const double lg = alpha(t, j) + beta(t, j) - seg_ll;
      if (lg == kNegInf) continue;
      const double gamma = std::exp(lg);
      if (gamma < kMinOccupancy) continue;
      // split the state occupancy across mixture components
      const DiagonalGmm& g = hmm.states[j];
      const std::size_t m_count = g.components();
      double best = kNegInf;
      for (std::size_t m = 0; m < m_count; ++m) {
        comp_lp[m] = std::log(g.weights[m]) + log_gaussian(g, m, seq.row(t));
        best = std::max(best, comp_lp[m]);
      }
      double denom = 0.0;
      for (std::size_t m = 0; m < m_count; ++m) denom += std::exp(comp_lp[m] - best);
      auto x = seq.row(t);
      for (std::size_t m = 0; m < m_count; ++m) {
        const double gm = gamma * std::exp(comp_lp[m] - best) / denom;
        if (gm <= 0.0) continue;
        stats.mass[j][m] += gm;
        auto macc = stats.mean_acc[j].row(m);
        auto vacc = stats.var_acc[j].row(m);
        for (std::size_t d = 0; d < x.size(); ++d) {
          macc[d] += gm * x[d];
          vacc[d] += gm * x[d] * x[d];
        }
      }
      // transition expectations
      if (t + 1 < t_len) {
        const double xi_self =
            alpha(t, j) + log_self[j] + logb(j, t + 1) + beta(t + 1, j) - seg_ll;
        if (xi_self > kNegInf) stats.self_count[j] += std::exp(xi_self);
        if (j + 1 < s_count) {
          const double xi_next = alpha(t, j) + log_next[j] + logb(j + 1, t + 1) +
                                 beta(t + 1, j + 1) - seg_ll;
          if (xi_next > kNegInf) stats.next_count[j] += std::exp(xi_next);
        }
      }
    }
  }
  return seg_ll;
}

}  // namespace

void UnitHmm::validate() const {
  require(state_count() >= 1, "HMM needs at least one state");
  require(self_prob.size() == state_count() && next_prob.size() == state_count(),
          "HMM transition shapes disagree");
  for (std::size_t j = 0; j < state_count(); ++j) {
    require(self_prob[j] >= 0.0 && next_prob[j] > 0.0,
            "HMM transition probabilities out of range");
    require(std::abs(self_prob[j] + next_prob[j] - 1.0) <= 1e-10,
            "HMM transition row must sum to 1");
    states[j].validate();
  }
}

UnitHmm init_hmm(const std::string& label, const std::vector<Matrix>& segments,
                 const HmmTrainConfig& config) {
  require(!segments.empty(), "init_hmm: empty segment list");
  for (const auto& s : segments) {
    require(s.rows() >= 1, "init_hmm: empty segment");
    require(s.cols() == segments.front().cols(), "init_hmm: segment dimension mismatch");
  }
  require(config.state_divisor >= 1, "init_hmm: state divisor must be >= 1");

  double mean_len = 0.0;
  for (const auto& s : segments) mean_len += static_cast<double>(s.rows());
  mean_len /= static_cast<double>(segments.size());
  const std::size_t s_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(mean_len / config.state_divisor)));

  const std::size_t dim = segments.front().cols();
  const Matrix pooled = pool_rows(segments);
  const auto global_var = column_variances(pooled);
  std::vector<double> floor(dim);
  for (std::size_t d = 0; d < dim; ++d)
    floor[d] = std::max(config.variance_floor * global_var[d], kMinVariance);

  // gather each state's share of every segment
  std::vector<std::vector<double>> state_frames(s_count);
  for (const auto& seg : segments) {
    const auto offsets = chunk_offsets(seg.rows(), s_count);
    for (std::size_t j = 0; j < s_count; ++j)
      for (std::size_t t = offsets[j]; t < offsets[j + 1]; ++t) {
        auto row = seg.row(t);
        state_frames[j].insert(state_frames[j].end(), row.begin(), row.end());
      }
  }

  UnitHmm hmm;
  hmm.label = label;
  hmm.self_prob.assign(s_count, kInitSelf);
  hmm.next_prob.assign(s_count, kInitNext);
  hmm.states.resize(s_count);
  for (std::size_t j = 0; j < s_count; ++j) {
    const std::size_t n = state_frames[j].size() / dim;
    if (n == 0) continue;  // borrowed below
    Matrix frames(n, dim, std::move(state_frames[j]));
    const std::size_t k = std::min<std::size_t>(std::max<std::uint32_t>(config.mixtures, 1), n);
    if (k == 1) {
      hmm.states[j] = fit_single_gaussian(frames, floor);
    } else {
      GmmFitConfig gc;
      gc.variance_floor = config.variance_floor;
      gc.seed = mix_seed(config.seed, j);
      gc.threads = 1;
      hmm.states[j] = fit_gmm(frames, k, gc).model;
    }
  }
  // states with no assigned frames borrow the nearest populated one
  for (std::size_t j = 0; j < s_count; ++j) {
    if (!hmm.states[j].weights.empty()) continue;
    for (std::size_t off = 1; off < s_count; ++off) {
      if (j >= off && !hmm.states[j - off].weights.empty()) {
        hmm.states[j] = hmm.states[j - off];
        break;
      }
      if (j + off < s_count && !hmm.states[j + off].weights.empty()) {
        hmm.states[j] = hmm.states[j + off];
        break;
      }
    }
  }
  hmm.validate();
  return hmm;
}

BaumWelchResult baum_welch(const UnitHmm& hmm, const std::vector<Matrix>& segments,
                           const HmmTrainConfig& config) {
  hmm.validate();
  const std::size_t s_count = hmm.state_count();
  const std::size_t dim = hmm.dim();

  std::vector<const Matrix*> used;
  BaumWelchResult result;
  for (const auto& s : segments) {
    require(s.cols() == dim, "baum_welch: segment dimension mismatch");
    if (s.rows() < s_count)
      ++result.skipped_segments;  // cannot traverse all states
    else
      used.push_back(&s);
  }
  require(!used.empty(), "baum_welch: every segment is shorter than the state count");

  std::size_t mixtures = 0;
  for (const auto& st : hmm.states) mixtures = std::max(mixtures, st.components());

  std::vector<double> floor(dim);
  {
    std::vector<Matrix> copies;
    copies.reserve(used.size());
    for (const auto* s : used) copies.push_back(*s);
    const auto global_var = column_variances(pool_rows(copies));
    for (std::size_t d = 0; d < dim; ++d)
      floor[d] = std::max(config.variance_floor * global_var[d], kMinVariance);
  }

  result.model = hmm;
  std::size_t total_frames = 0;
  for (const auto* s : used) total_frames += s->rows();
  double prev_ll = kNegInf;

  for (std::uint32_t iter = 0; iter < config.max_iters; ++iter) {
    std::vector<HmmStats> per_segment(used.size(), HmmStats(s_count, mixtures, dim));
    for_each_block(used.size(), 1, config.threads,
                   [&](std::size_t b, std::size_t, std::size_t) {
      accumulate_segment(result.model, *used[b], per_segment[b], mixtures);
    });
    HmmStats total(s_count, mixtures, dim);
    for (const auto& st : per_segment) total.merge(st);

    result.log_likelihood_trace.push_back(total.log_likelihood);
    result.iterations = iter + 1;

    // transitions
    for (std::size_t j = 0; j < s_count; ++j) {
      const double fwd = j + 1 < s_count ? total.next_count[j]
                                         : total.exits;  // final state exits once per segment
      const double denom = total.self_count[j] + fwd;
      if (denom <= 0.0) continue;
      double p_next = fwd / denom;
      p_next = std::clamp(p_next, 1e-10, 1.0);
      result.model.next_prob[j] = p_next;
      result.model.self_prob[j] = 1.0 - p_next;
    }

    // emissions
    for (std::size_t j = 0; j < s_count; ++j) {
      DiagonalGmm& g = result.model.states[j];
      double state_mass = 0.0;
      for (std::size_t m = 0; m < g.components(); ++m) state_mass += total.mass[j][m];
      if (state_mass < kMinOccupancy) continue;  // starved state keeps its parameters
      for (std::size_t m = 0; m < g.components(); ++m) {
        const double mass = total.mass[j][m];
        if (mass < kMinOccupancy) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          const double mu = total.mean_acc[j](m, d) / mass;
          const double ex2 = total.var_acc[j](m, d) / mass;
          g.means(m, d) = mu;
          g.variances(m, d) = std::max(ex2 - mu * mu, floor[d]);
        }
        g.weights[m] = mass;
      }
      double wsum = 0.0;
      for (double w : g.weights) wsum += w;
      for (double& w : g.weights) w /= wsum;
    }

    const double gain = (total.log_likelihood - prev_ll) / static_cast<double>(total_frames);
    if (iter > 0 && gain < config.tol) break;
    prev_ll = total.log_likelihood;
  }

  result.model.validate();
  return result;
}

Alignment viterbi_align(const UnitHmm& hmm, const Matrix& seq) {
  hmm.validate();
  require(seq.cols() == hmm.dim(), "viterbi_align: dimension mismatch");
  const std::size_t s_count = hmm.state_count();
  const std::size_t t_len = seq.rows();
  require(t_len >= 1, "viterbi_align: empty sequence");
  if (t_len < s_count)
    fail(ErrorCode::no_path, "viterbi_align: sequence shorter than state count");

  const Matrix logb = emission_table(hmm, seq);
  std::vector<double> log_self(s_count), log_next(s_count);
  for (std::size_t j = 0; j < s_count; ++j) {
    log_self[j] = std::log(hmm.self_prob[j]);
    log_next[j] = std::log(hmm.next_prob[j]);
  }

  Matrix dp(t_len, s_count, kNegInf);
  std::vector<std::vector<std::uint8_t>> from_prev(t_len,
                                                   std::vector<std::uint8_t>(s_count, 0));
  dp(0, 0) = logb(0, 0);
  for (std::size_t t = 1; t < t_len; ++t)
    for (std::size_t j = 0; j < s_count; ++j) {
      double best = dp(t - 1, j) + log_self[j];
      std::uint8_t via = 0;
      if (j > 0) {
        const double adv = dp(t - 1, j - 1) + log_next[j - 1];
        if (adv > best) { best = adv; via = 1; }
      }
      dp(t, j) = best + logb(j, t);
      from_prev[t][j] = via;
    }

  Alignment out;
  out.log_score = dp(t_len - 1, s_count - 1) + log_next[s_count - 1];
  out.states.resize(t_len);
  std::size_t j = s_count - 1;
  for (std::size_t t = t_len; t-- > 0;) {
    out.states[t] = static_cast<std::uint32_t>(j);
    if (t > 0 && from_prev[t][j]) --j;
  }
  return out;
}

double forward_log_likelihood(const UnitHmm& hmm, const Matrix& seq) {
  hmm.validate();
  require(seq.cols() == hmm.dim(), "forward: dimension mismatch");
  const std::size_t s_count = hmm.state_count();
  const std::size_t t_len = seq.rows();
  require(t_len >= 1, "forward: empty sequence");
  if (t_len < s_count) return kNegInf;

  const Matrix logb = emission_table(hmm, seq);
  std::vector<double> log_self(s_count), log_next(s_count);
  for (std::size_t j = 0; j < s_count; ++j) {
    log_self[j] = std::log(hmm.self_prob[j]);
    log_next[j] = std::log(hmm.next_prob[j]);
  }
  std::vector<double> alpha(s_count, kNegInf), next(s_count, kNegInf);
  alpha[0] = logb(0, 0);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < s_count; ++j) {
      double a = alpha[j] + log_self[j];
      if (j > 0) a = log_add(a, alpha[j - 1] + log_next[j - 1]);
      next[j] = a + logb(j, t);
    }
    std::swap(alpha, next);
  }
  return alpha[s_count - 1] + log_next[s_count - 1];
}

}  // namespace genseg
