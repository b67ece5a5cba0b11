#include "core/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "core/parallel.hpp"

namespace genseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint32_t kFromStart = UINT32_MAX;

// Sequence model unrolled into a unit-emitting graph. Every non-start node
// is entered by exactly one unit label; predecessors carry the sequence
// model's transition log-probability for that arc.
struct GrammarGraph {
  struct Node {
    std::int64_t label = -1;  // vocabulary index; -1 only for the start node
    double final_lp = kNegInf;
    std::vector<std::pair<std::uint32_t, double>> preds;
  };
  std::vector<Node> nodes;  // node 0 is the start
};

GrammarGraph build_graph(const SequenceModel& model) {
  GrammarGraph g;
  if (model.kind == SequenceModelKind::path_grammar) {
    g.nodes.resize(model.trie.size());
    for (std::size_t u = 0; u < model.trie.size(); ++u) {
      g.nodes[u].final_lp = model.trie[u].accepting ? 0.0 : kNegInf;
      for (const auto& [label, child] : model.trie[u].edges) {
        g.nodes[child].label = label;
        g.nodes[child].preds.emplace_back(static_cast<std::uint32_t>(u), 0.0);
      }
    }
  } else {
    const std::size_t v = model.vocabulary.size();
    g.nodes.resize(v + 1);
    for (std::size_t b = 0; b < v; ++b) {
      auto& node = g.nodes[b + 1];
      node.label = static_cast<std::int64_t>(b);
      node.final_lp = model.bigram_logp(b, v);
      const double from_start = model.bigram_logp(v, b);
      if (from_start > kNegInf) node.preds.emplace_back(0, from_start);
      for (std::size_t a = 0; a < v; ++a) {
        const double w = model.bigram_logp(a, b);
        if (w > kNegInf) node.preds.emplace_back(static_cast<std::uint32_t>(a + 1), w);
      }
    }
  }
  return g;
}

// Minimum frames needed to reach an accepting node; used for the no-path
// diagnostic. Entering node n costs S_n frames (one per state).
std::size_t min_path_frames(const GrammarGraph& g, const std::vector<const UnitHmm*>& hmm_of) {
  const std::size_t n_nodes = g.nodes.size();
  std::vector<std::size_t> best(n_nodes, SIZE_MAX);
  using Item = std::pair<std::size_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  best[0] = 0;
  queue.emplace(0, 0);
  std::vector<std::vector<std::uint32_t>> succs(n_nodes);
  for (std::size_t n = 1; n < n_nodes; ++n)
    for (const auto& [p, w] : g.nodes[n].preds) succs[p].push_back(static_cast<std::uint32_t>(n));
  while (!queue.empty()) {
    const auto [dist, node] = queue.top();
    queue.pop();
    if (dist > best[node]) continue;
    for (std::uint32_t s : succs[node]) {
      const std::size_t cand =
          dist + hmm_of[static_cast<std::size_t>(g.nodes[s].label)]->state_count();
      if (cand < best[s]) {
        best[s] = cand;
        queue.emplace(cand, s);
      }
    }
  }
  std::size_t result = SIZE_MAX;
  for (std::size_t n = 1; n < n_nodes; ++n)
    if (g.nodes[n].final_lp > kNegInf) result = std::min(result, best[n]);
  return result;
}

}  // namespace

std::vector<std::string> Segmentation::labels() const {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(s.label);
  return out;
}

const std::string& Segmentation::label_at(std::size_t frame) const {
  for (const auto& s : spans)
    if (frame >= s.start && frame < s.end) return s.label;
  fail_invalid("Segmentation: frame outside every span");
}

void Segmentation::validate() const {
  require(!spans.empty(), "Segmentation: no spans");
  std::size_t at = 0;
  for (const auto& s : spans) {
    require(s.start == at && s.end > s.start, "Segmentation: spans must tile the sequence");
    at = s.end;
  }
  require(at == frames, "Segmentation: spans do not cover the sequence");
}

Segmentation decode(const Matrix& seq, const UnitHmmSet& hmms, const SequenceModel& model,
                    const DecodeConfig& config) {
  const std::size_t t_len = seq.rows();
  require(t_len >= 1, "decode: empty sequence");

  // every vocabulary label needs a matching unit model
  std::vector<const UnitHmm*> hmm_of(model.vocabulary.size(), nullptr);
  for (std::size_t li = 0; li < model.vocabulary.size(); ++li) {
    const auto it = hmms.find(model.vocabulary[li]);
    require(it != hmms.end(),
            "decode: no HMM for unit '" + model.vocabulary[li] + "'");
    require(it->second.dim() == seq.cols(), "decode: feature dimension mismatch");
    hmm_of[li] = &it->second;
  }

  const GrammarGraph graph = build_graph(model);
  const std::size_t n_nodes = graph.nodes.size();

  // emission tables are shared between nodes carrying the same label
  std::vector<Matrix> emissions(model.vocabulary.size());
  std::vector<char> label_used(model.vocabulary.size(), 0);
  for (std::size_t n = 1; n < n_nodes; ++n)
    label_used[static_cast<std::size_t>(graph.nodes[n].label)] = 1;
  for (std::size_t li = 0; li < model.vocabulary.size(); ++li) {
    if (!label_used[li]) continue;
    const UnitHmm& h = *hmm_of[li];
    emissions[li] = Matrix(h.state_count(), t_len);
    for (std::size_t j = 0; j < h.state_count(); ++j)
      for (std::size_t t = 0; t < t_len; ++t)
        emissions[li](j, t) = log_likelihood(h.states[j], seq.row(t));
  }

  struct NodeDp {
    const UnitHmm* hmm = nullptr;
    const Matrix* logb = nullptr;
    std::vector<double> log_self, log_next;
    std::vector<double> score;        // T x S
    std::vector<std::uint8_t> back;   // 0 self, 1 advance, 2 entry
    std::vector<std::uint32_t> entry_from;  // per t, predecessor node
    std::size_t s_count = 0;
    double at(std::size_t t, std::size_t j) const { return score[t * s_count + j]; }
  };
  std::vector<NodeDp> dp(n_nodes);
  for (std::size_t n = 1; n < n_nodes; ++n) {
    auto& nd = dp[n];
    nd.hmm = hmm_of[graph.nodes[n].label];
    nd.logb = &emissions[graph.nodes[n].label];
    nd.s_count = nd.hmm->state_count();
    nd.log_self.resize(nd.s_count);
    nd.log_next.resize(nd.s_count);
    for (std::size_t j = 0; j < nd.s_count; ++j) {
      nd.log_self[j] = std::log(nd.hmm->self_prob[j]);
      nd.log_next[j] = std::log(nd.hmm->next_prob[j]);
    }
    nd.score.assign(t_len * nd.s_count, kNegInf);
    nd.back.assign(t_len * nd.s_count, 0);
    nd.entry_from.assign(t_len, kFromStart);
  }

  // token leaving node p after frames [0, t); start emits a token at t = 0
  const auto node_out = [&](std::uint32_t p, std::size_t t) -> double {
    if (p == 0) return t == 0 ? 0.0 : kNegInf;
    if (t == 0) return kNegInf;
    const auto& nd = dp[p];
    const double v = nd.at(t - 1, nd.s_count - 1);
    return v == kNegInf ? kNegInf : v + nd.log_next[nd.s_count - 1];
  };

  for (std::size_t t = 0; t < t_len; ++t) {
    // unit entries first: they read predecessor scores from t-1
    for (std::size_t n = 1; n < n_nodes; ++n) {
      auto& nd = dp[n];
      double entry = kNegInf;
      std::uint32_t from = kFromStart;
      for (const auto& [p, w] : graph.nodes[n].preds) {
        const double out = node_out(p, t);
        if (out == kNegInf) continue;
        const double cand = out + w + config.insertion_penalty;
        if (cand > entry) {
          entry = cand;
          from = p;
        }
      }
      nd.entry_from[t] = from;

      const double b0 = (*nd.logb)(0, t);
      double best = t > 0 ? nd.at(t - 1, 0) + nd.log_self[0] : kNegInf;
      std::uint8_t via = 0;
      if (entry > best) {
        best = entry;
        via = 2;
      }
      nd.score[t * nd.s_count] = best == kNegInf ? kNegInf : best + b0;
      nd.back[t * nd.s_count] = via;

      for (std::size_t j = 1; j < nd.s_count; ++j) {
        double s = t > 0 ? nd.at(t - 1, j) + nd.log_self[j] : kNegInf;
        std::uint8_t jvia = 0;
        if (t > 0) {
          const double adv = nd.at(t - 1, j - 1) + nd.log_next[j - 1];
          if (adv > s) {
            s = adv;
            jvia = 1;
          }
        }
        nd.score[t * nd.s_count + j] = s == kNegInf ? kNegInf : s + (*nd.logb)(j, t);
        nd.back[t * nd.s_count + j] = jvia;
      }
    }

    if (std::isfinite(config.beam)) {
      double best = kNegInf;
      for (std::size_t n = 1; n < n_nodes; ++n)
        for (std::size_t j = 0; j < dp[n].s_count; ++j)
          best = std::max(best, dp[n].at(t, j));
      const double cut = best - config.beam;
      for (std::size_t n = 1; n < n_nodes; ++n)
        for (std::size_t j = 0; j < dp[n].s_count; ++j)
          if (dp[n].at(t, j) < cut) dp[n].score[t * dp[n].s_count + j] = kNegInf;
    }
  }

  // best accepting node
  double best_total = kNegInf;
  std::uint32_t best_node = 0;
  for (std::size_t n = 1; n < n_nodes; ++n) {
    if (graph.nodes[n].final_lp == kNegInf) continue;
    const double out = node_out(static_cast<std::uint32_t>(n), t_len);
    if (out == kNegInf) continue;
    const double total = out + graph.nodes[n].final_lp;
    if (total > best_total) {
      best_total = total;
      best_node = static_cast<std::uint32_t>(n);
    }
  }
  if (best_node == 0) {
    const std::size_t need = min_path_frames(graph, hmm_of);
    fail(ErrorCode::no_path,
         "decode: no grammar path fits in " + std::to_string(t_len) +
             " frames (shortest path needs " +
             (need == SIZE_MAX ? std::string("infinitely many")
                               : std::to_string(need)) +
             ")");
  }

  Segmentation seg;
  seg.frames = t_len;
  seg.total_log_score = best_total;

  // backtrace: walk states from the accepting node's exit
  std::uint32_t node = best_node;
  std::size_t t = t_len;  // frames [0, t) consumed
  while (node != 0) {
    const auto& nd = dp[node];
    std::size_t j = nd.s_count - 1;
    const std::size_t span_end = t;
    std::size_t cursor = t - 1;
    for (;;) {
      const std::uint8_t via = nd.back[cursor * nd.s_count + j];
      if (via == 2) break;  // unit entered at `cursor`
      if (via == 1) --j;
      --cursor;
    }
    SegSpan span;
    span.label = model.vocabulary[graph.nodes[node].label];
    span.start = cursor;
    span.end = span_end;
    const double exit_lp = nd.log_next[nd.s_count - 1];
    const double entry_pred = node_out(nd.entry_from[cursor], cursor);
    double arc_w = 0.0;
    for (const auto& [p, w] : graph.nodes[node].preds)
      if (p == nd.entry_from[cursor]) {
        arc_w = w;
        break;
      }
    span.log_score = nd.at(span_end - 1, nd.s_count - 1) + exit_lp -
                     (entry_pred + arc_w + config.insertion_penalty);
    seg.spans.push_back(span);
    node = nd.entry_from[cursor];
    t = cursor;
  }
  std::reverse(seg.spans.begin(), seg.spans.end());
  seg.validate();
  return seg;
}

ClassifyResult classify_activity(const Matrix& seq, const std::vector<ActivityBundle>& bundles,
                                 const DecodeConfig& config, std::uint32_t threads) {
  require(!bundles.empty(), "classify_activity: no activity bundles");
  std::vector<double> scores(bundles.size(), kNegInf);
  std::vector<Segmentation> segs(bundles.size());
  for_each_block(bundles.size(), 1, threads, [&](std::size_t b, std::size_t, std::size_t) {
    try {
      segs[b] = decode(seq, *bundles[b].hmms, *bundles[b].model, config);
      scores[b] = segs[b].total_log_score;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_path) throw;
    }
  });
  std::size_t arg = bundles.size();
  for (std::size_t b = 0; b < bundles.size(); ++b)
    if (scores[b] > kNegInf && (arg == bundles.size() || scores[b] > scores[arg])) arg = b;
  if (arg == bundles.size())
    fail(ErrorCode::no_path, "classify_activity: no activity admits a valid path");
  ClassifyResult result;
  result.best = bundles[arg].name;
  result.best_index = arg;
  result.scores = std::move(scores);
  result.best_segmentation = std::move(segs[arg]);
  return result;
}

}  // namespace genseg
