#include "genseg.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "core/balance.hpp"
#include "core/decoder.hpp"
#include "core/fisher.hpp"
#include "core/gmm.hpp"
#include "core/hmm.hpp"
#include "core/io.hpp"
#include "core/metrics.hpp"
#include "core/normality.hpp"
#include "core/parallel.hpp"
#include "core/pca.hpp"
#include "core/rng.hpp"
#include "core/sequence_model.hpp"
#include "core/synthesis.hpp"

struct gs_seq { genseg::Matrix m; };
struct gs_gmm { genseg::DiagonalGmm m; };
struct gs_pca { genseg::PcaModel m; };
struct gs_hmmset { genseg::UnitHmmSet m; std::vector<std::string> labels; };
struct gs_seqmodel { genseg::SequenceModel m; };
struct gs_segmentation { genseg::Segmentation m; };
struct gs_segset { genseg::SegmentsByLabel m; std::vector<std::string> labels; };
struct gs_dataspec { genseg::DatasetSpec m; };
struct gs_dataset { genseg::GeneratedDataset m; };
struct gs_confusion { genseg::ConfusionMatrix m; };

namespace {

thread_local std::string t_last_error;

gs_status map_code(genseg::ErrorCode code) {
  switch (code) {
    case genseg::ErrorCode::invalid_input: return GS_EINVAL;
    case genseg::ErrorCode::io_failure: return GS_EIO;
    case genseg::ErrorCode::bad_format: return GS_EFORMAT;
    case genseg::ErrorCode::no_path: return GS_ENOPATH;
    case genseg::ErrorCode::out_of_vocabulary: return GS_EOOV;
  }
  return GS_EINTERNAL;
}

template <typename Fn>
gs_status guarded(Fn&& fn) {
  try {
    fn();
    return GS_OK;
  } catch (const genseg::Error& e) {
    t_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GS_EINTERNAL;
  }
}

gs_status invalid(const char* what) {
  t_last_error = what;
  return GS_EINVAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void refresh_labels(gs_hmmset* h) {
  h->labels.clear();
  for (const auto& [label, hmm] : h->m) h->labels.push_back(label);
}

void refresh_labels(gs_segset* s) {
  s->labels.clear();
  for (const auto& [label, segs] : s->m) s->labels.push_back(label);
}

genseg::DecodeConfig decode_config(const gs_decode_opts* opts) {
  genseg::DecodeConfig cfg;
  if (opts) {
    cfg.insertion_penalty = opts->insertion_penalty;
    cfg.beam = opts->beam > 0.0 ? opts->beam : std::numeric_limits<double>::infinity();
  }
  return cfg;
}

std::vector<std::vector<std::string>> annotation_labels(
    const gs_segmentation* const* annotations, size_t n) {
  std::vector<std::vector<std::string>> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(annotations[i]->m.labels());
  return out;
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return t_last_error.c_str(); }

void gs_string_free(char* s) { std::free(s); }

/* ---- frame sequences ------------------------------------------------ */

gs_status gs_seq_create(const double* data, uint32_t frames, uint32_t dim, gs_seq** out) {
  if (!data || !out) return invalid("gs_seq_create: null argument");
  return guarded([&] {
    genseg::require(frames >= 1 && dim >= 1, "gs_seq_create: empty shape");
    auto seq = std::make_unique<gs_seq>();
    seq->m = genseg::Matrix(frames, dim,
                            std::vector<double>(data, data + std::size_t(frames) * dim));
    *out = seq.release();
  });
}

gs_status gs_seq_load(const char* path, gs_seq** out) {
  if (!path || !out) return invalid("gs_seq_load: null argument");
  return guarded([&] { *out = new gs_seq{genseg::load_sequence(path)}; });
}

gs_status gs_seq_load_csv(const char* path, gs_seq** out) {
  if (!path || !out) return invalid("gs_seq_load_csv: null argument");
  return guarded([&] { *out = new gs_seq{genseg::load_sequence_csv(path)}; });
}

gs_status gs_seq_save(const gs_seq* seq, const char* path) {
  if (!seq || !path) return invalid("gs_seq_save: null argument");
  return guarded([&] { genseg::save_sequence(seq->m, path); });
}

uint32_t gs_seq_frames(const gs_seq* seq) {
  return seq ? static_cast<uint32_t>(seq->m.rows()) : 0;
}

uint32_t gs_seq_dim(const gs_seq* seq) {
  return seq ? static_cast<uint32_t>(seq->m.cols()) : 0;
}

const double* gs_seq_data(const gs_seq* seq) { return seq ? seq->m.data() : nullptr; }

gs_status gs_seq_slice(const gs_seq* seq, uint32_t start, uint32_t end, gs_seq** out) {
  if (!seq || !out) return invalid("gs_seq_slice: null argument");
  return guarded([&] {
    genseg::require(start < end, "gs_seq_slice: empty range");
    *out = new gs_seq{seq->m.slice_rows(start, end)};
  });
}

gs_status gs_seq_vstack(const gs_seq* const* seqs, size_t n, gs_seq** out) {
  if (!seqs || !out || n == 0) return invalid("gs_seq_vstack: null or empty argument");
  return guarded([&] {
    std::size_t rows = 0;
    const std::size_t dim = seqs[0]->m.cols();
    for (size_t i = 0; i < n; ++i) {
      genseg::require(seqs[i] && seqs[i]->m.cols() == dim,
                      "gs_seq_vstack: dimension mismatch");
      rows += seqs[i]->m.rows();
    }
    genseg::Matrix stacked(rows, dim);
    std::size_t at = 0;
    for (size_t i = 0; i < n; ++i) {
      std::copy(seqs[i]->m.storage().begin(), seqs[i]->m.storage().end(),
                stacked.data() + at * dim);
      at += seqs[i]->m.rows();
    }
    *out = new gs_seq{std::move(stacked)};
  });
}

gs_status gs_seq_sample_rows(const gs_seq* seq, uint32_t n, uint64_t seed, gs_seq** out) {
  if (!seq || !out) return invalid("gs_seq_sample_rows: null argument");
  return guarded([&] {
    genseg::require(n >= 1 && n <= seq->m.rows(),
                    "gs_seq_sample_rows: sample count out of range");
    genseg::Rng rng(seed);
    auto idx = rng.sample_without_replacement(seq->m.rows(), n);
    std::sort(idx.begin(), idx.end());
    genseg::Matrix sampled(n, seq->m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto row = seq->m.row(idx[i]);
      std::copy(row.begin(), row.end(), sampled.row(i).data());
    }
    *out = new gs_seq{std::move(sampled)};
  });
}

gs_status gs_seq_clip_l2(const gs_seq* seq, gs_seq** out) {
  if (!seq || !out) return invalid("gs_seq_clip_l2: null argument");
  return guarded([&] { *out = new gs_seq{genseg::clip_l2_per_dimension(seq->m)}; });
}

void gs_seq_free(gs_seq* seq) { delete seq; }

/* ---- Gaussian mixtures ---------------------------------------------- */

void gs_gmm_fit_opts_init(gs_gmm_fit_opts* opts) {
  if (!opts) return;
  genseg::GmmFitConfig def;
  opts->max_iters = def.max_iters;
  opts->tol = def.tol;
  opts->variance_floor = def.variance_floor;
  opts->seed = def.seed;
  opts->threads = def.threads;
}

gs_status gs_gmm_fit(const gs_seq* samples, uint32_t k, const gs_gmm_fit_opts* opts,
                     gs_gmm** out) {
  if (!samples || !out) return invalid("gs_gmm_fit: null argument");
  return guarded([&] {
    genseg::GmmFitConfig cfg;
    if (opts) {
      cfg.max_iters = opts->max_iters;
      cfg.tol = opts->tol;
      cfg.variance_floor = opts->variance_floor;
      cfg.seed = opts->seed;
      cfg.threads = opts->threads;
    }
    *out = new gs_gmm{genseg::fit_gmm(samples->m, k, cfg).model};
  });
}

gs_status gs_gmm_save(const gs_gmm* gmm, const char* path) {
  if (!gmm || !path) return invalid("gs_gmm_save: null argument");
  return guarded([&] { genseg::save_gmm(gmm->m, path); });
}

gs_status gs_gmm_load(const char* path, gs_gmm** out) {
  if (!path || !out) return invalid("gs_gmm_load: null argument");
  return guarded([&] { *out = new gs_gmm{genseg::load_gmm(path)}; });
}

uint32_t gs_gmm_components(const gs_gmm* gmm) {
  return gmm ? static_cast<uint32_t>(gmm->m.components()) : 0;
}

uint32_t gs_gmm_dim(const gs_gmm* gmm) {
  return gmm ? static_cast<uint32_t>(gmm->m.dim()) : 0;
}

gs_status gs_gmm_posteriors(const gs_gmm* gmm, const double* x, uint32_t dim,
                            double* out_k) {
  if (!gmm || !x || !out_k) return invalid("gs_gmm_posteriors: null argument");
  return guarded([&] {
    const auto g = genseg::posteriors(gmm->m, {x, dim});
    std::copy(g.begin(), g.end(), out_k);
  });
}

gs_status gs_gmm_log_likelihood(const gs_gmm* gmm, const double* x, uint32_t dim,
                                double* out) {
  if (!gmm || !x || !out) return invalid("gs_gmm_log_likelihood: null argument");
  return guarded([&] { *out = genseg::log_likelihood(gmm->m, {x, dim}); });
}

gs_status gs_gmm_sample(const gs_gmm* gmm, uint32_t n, uint64_t seed, gs_seq** out) {
  if (!gmm || !out) return invalid("gs_gmm_sample: null argument");
  return guarded([&] { *out = new gs_seq{genseg::sample_gmm(gmm->m, n, seed)}; });
}

void gs_gmm_free(gs_gmm* gmm) { delete gmm; }

/* ---- Fisher vectors -------------------------------------------------- */

uint32_t gs_fv_dim(const gs_gmm* gmm) {
  return gmm ? static_cast<uint32_t>(genseg::fisher_dim(gmm->m)) : 0;
}

gs_status gs_fv_encode(const gs_gmm* gmm, const gs_seq* features, double* out) {
  if (!gmm || !features || !out) return invalid("gs_fv_encode: null argument");
  return guarded([&] {
    const auto fv = genseg::encode_fv(gmm->m, features->m);
    std::copy(fv.begin(), fv.end(), out);
  });
}

void gs_fv_power_normalize(double* v, size_t n) {
  if (v) genseg::power_normalize({v, n});
}

void gs_fv_l2_normalize(double* v, size_t n) {
  if (v) genseg::l2_normalize({v, n});
}

gs_status gs_fv_encode_frames(const gs_gmm* gmm, const gs_seq* seq, uint32_t window,
                              uint32_t threads, gs_seq** out) {
  if (!gmm || !seq || !out) return invalid("gs_fv_encode_frames: null argument");
  return guarded([&] {
    *out = new gs_seq{genseg::sliding_window_encode(gmm->m, seq->m, window, threads)};
  });
}

/* ---- PCA -------------------------------------------------------------- */

gs_status gs_pca_fit(const gs_seq* samples, uint32_t out_dim, int whiten, gs_pca** out) {
  if (!samples || !out) return invalid("gs_pca_fit: null argument");
  return guarded([&] {
    *out = new gs_pca{genseg::fit_pca(samples->m, out_dim, whiten != 0)};
  });
}

gs_status gs_pca_save(const gs_pca* pca, const char* path) {
  if (!pca || !path) return invalid("gs_pca_save: null argument");
  return guarded([&] { genseg::save_pca(pca->m, path); });
}

gs_status gs_pca_load(const char* path, gs_pca** out) {
  if (!path || !out) return invalid("gs_pca_load: null argument");
  return guarded([&] { *out = new gs_pca{genseg::load_pca(path)}; });
}

uint32_t gs_pca_in_dim(const gs_pca* pca) {
  return pca ? static_cast<uint32_t>(pca->m.in_dim()) : 0;
}

uint32_t gs_pca_out_dim(const gs_pca* pca) {
  return pca ? static_cast<uint32_t>(pca->m.out_dim()) : 0;
}

gs_status gs_pca_project(const gs_pca* pca, const gs_seq* seq, gs_seq** out) {
  if (!pca || !seq || !out) return invalid("gs_pca_project: null argument");
  return guarded([&] { *out = new gs_seq{genseg::project_rows(pca->m, seq->m)}; });
}

void gs_pca_free(gs_pca* pca) { delete pca; }

/* ---- normality -------------------------------------------------------- */

namespace {

void export_test_result(const genseg::NormalityTestResult& r, double* stat, double* p,
                        int* pass) {
  if (stat) *stat = r.statistic;
  if (p) *p = r.p_value;
  if (pass) *pass = r.pass ? 1 : 0;
}

}  // namespace

gs_status gs_normality_jarque_bera(const double* x, size_t n, double alpha, double* stat,
                                   double* p, int* pass) {
  if (!x) return invalid("gs_normality_jarque_bera: null argument");
  return guarded([&] { export_test_result(genseg::jarque_bera({x, n}, alpha), stat, p, pass); });
}

gs_status gs_normality_lilliefors(const double* x, size_t n, double alpha, double* stat,
                                  double* p, int* pass) {
  if (!x) return invalid("gs_normality_lilliefors: null argument");
  return guarded([&] { export_test_result(genseg::lilliefors({x, n}, alpha), stat, p, pass); });
}

gs_status gs_normality_report(const gs_seq* data, const double* alphas, size_t n_alphas,
                              uint32_t samples_per_dim, uint64_t seed, uint32_t threads,
                              char** csv_out) {
  if (!data || !alphas || !csv_out) return invalid("gs_normality_report: null argument");
  return guarded([&] {
    const auto report = genseg::dimension_pass_report(data->m, {alphas, n_alphas},
                                                      samples_per_dim, seed, threads);
    *csv_out = dup_string(report.to_csv());
  });
}

/* ---- training segments ------------------------------------------------ */

gs_status gs_segset_create(gs_segset** out) {
  if (!out) return invalid("gs_segset_create: null argument");
  *out = new gs_segset{};
  return GS_OK;
}

gs_status gs_segset_add(gs_segset* set, const char* label, const gs_seq* frames) {
  if (!set || !label || !frames) return invalid("gs_segset_add: null argument");
  return guarded([&] {
    genseg::require(frames->m.rows() >= 1, "gs_segset_add: empty segment");
    genseg::require(frames->m.all_finite(), "gs_segset_add: non-finite values");
    set->m[label].push_back({label, frames->m, false});
    refresh_labels(set);
  });
}

gs_status gs_segset_balance(gs_segset* set, uint32_t min_n, uint32_t max_n,
                            uint64_t seed) {
  if (!set) return invalid("gs_segset_balance: null argument");
  return guarded([&] {
    const uint32_t cap = max_n == 0 ? UINT32_MAX : max_n;
    set->m = genseg::balance_classes(set->m, min_n, cap, seed);
    refresh_labels(set);
  });
}

uint32_t gs_segset_labels(const gs_segset* set) {
  return set ? static_cast<uint32_t>(set->labels.size()) : 0;
}

const char* gs_segset_label(const gs_segset* set, uint32_t index) {
  if (!set || index >= set->labels.size()) return nullptr;
  return set->labels[index].c_str();
}

uint32_t gs_segset_count(const gs_segset* set, const char* label) {
  if (!set || !label) return 0;
  const auto it = set->m.find(label);
  return it == set->m.end() ? 0 : static_cast<uint32_t>(it->second.size());
}

uint32_t gs_segset_synthetic_count(const gs_segset* set, const char* label) {
  if (!set || !label) return 0;
  const auto it = set->m.find(label);
  if (it == set->m.end()) return 0;
  uint32_t n = 0;
  for (const auto& s : it->second)
    if (s.synthetic) ++n;
  return n;
}

void gs_segset_free(gs_segset* set) { delete set; }

/* ---- unit HMMs --------------------------------------------------------- */

void gs_hmm_train_opts_init(gs_hmm_train_opts* opts) {
  if (!opts) return;
  genseg::HmmTrainConfig def;
  opts->state_divisor = def.state_divisor;
  opts->mixtures = def.mixtures;
  opts->bw_max_iters = def.max_iters;
  opts->bw_tol = def.tol;
  opts->variance_floor = def.variance_floor;
  opts->seed = def.seed;
  opts->threads = def.threads;
}

gs_status gs_hmmset_train(const gs_segset* segments, const gs_hmm_train_opts* opts,
                          uint32_t* skipped, gs_hmmset** out) {
  if (!segments || !out) return invalid("gs_hmmset_train: null argument");
  return guarded([&] {
    genseg::require(!segments->m.empty(), "gs_hmmset_train: no training segments");
    genseg::HmmTrainConfig cfg;
    if (opts) {
      cfg.state_divisor = opts->state_divisor;
      cfg.mixtures = opts->mixtures;
      cfg.max_iters = opts->bw_max_iters;
      cfg.tol = opts->bw_tol;
      cfg.variance_floor = opts->variance_floor;
      cfg.seed = opts->seed;
      cfg.threads = opts->threads;
    }
    auto set = std::make_unique<gs_hmmset>();
    uint32_t total_skipped = 0;
    for (const auto& [label, segs] : segments->m) {
      std::vector<genseg::Matrix> frames;
      frames.reserve(segs.size());
      for (const auto& s : segs) frames.push_back(s.frames);
      const auto init = genseg::init_hmm(label, frames, cfg);
      auto trained = genseg::baum_welch(init, frames, cfg);
      total_skipped += static_cast<uint32_t>(trained.skipped_segments);
      set->m.emplace(label, std::move(trained.model));
    }
    refresh_labels(set.get());
    if (skipped) *skipped = total_skipped;
    *out = set.release();
  });
}

gs_status gs_hmmset_save(const gs_hmmset* hmms, const char* dir) {
  if (!hmms || !dir) return invalid("gs_hmmset_save: null argument");
  return guarded([&] { genseg::save_hmmset(hmms->m, dir); });
}

gs_status gs_hmmset_load(const char* dir, gs_hmmset** out) {
  if (!dir || !out) return invalid("gs_hmmset_load: null argument");
  return guarded([&] {
    auto set = std::make_unique<gs_hmmset>();
    set->m = genseg::load_hmmset(dir);
    refresh_labels(set.get());
    *out = set.release();
  });
}

uint32_t gs_hmmset_units(const gs_hmmset* hmms) {
  return hmms ? static_cast<uint32_t>(hmms->labels.size()) : 0;
}

const char* gs_hmmset_label(const gs_hmmset* hmms, uint32_t index) {
  if (!hmms || index >= hmms->labels.size()) return nullptr;
  return hmms->labels[index].c_str();
}

uint32_t gs_hmmset_states(const gs_hmmset* hmms, const char* label) {
  if (!hmms || !label) return 0;
  const auto it = hmms->m.find(label);
  return it == hmms->m.end() ? 0 : static_cast<uint32_t>(it->second.state_count());
}

gs_status gs_hmmset_align(const gs_hmmset* hmms, const char* label, const gs_seq* seq,
                          uint32_t* out_states, double* log_score) {
  if (!hmms || !label || !seq) return invalid("gs_hmmset_align: null argument");
  return guarded([&] {
    const auto it = hmms->m.find(label);
    genseg::require(it != hmms->m.end(),
                    std::string("gs_hmmset_align: no unit '") + label + "'");
    const auto alignment = genseg::viterbi_align(it->second, seq->m);
    if (out_states)
      std::copy(alignment.states.begin(), alignment.states.end(), out_states);
    if (log_score) *log_score = alignment.log_score;
  });
}

void gs_hmmset_free(gs_hmmset* hmms) { delete hmms; }

/* ---- sequence models ---------------------------------------------------- */

gs_status gs_seqmodel_build_paths(const gs_segmentation* const* annotations, size_t n,
                                  gs_seqmodel** out) {
  if (!annotations || !out) return invalid("gs_seqmodel_build_paths: null argument");
  return guarded([&] {
    *out = new gs_seqmodel{genseg::build_path_grammar(annotation_labels(annotations, n))};
  });
}

gs_status gs_seqmodel_build_bigram(const gs_segmentation* const* annotations, size_t n,
                                   double smoothing_k, gs_seqmodel** out) {
  if (!annotations || !out) return invalid("gs_seqmodel_build_bigram: null argument");
  return guarded([&] {
    *out = new gs_seqmodel{
        genseg::build_bigram(annotation_labels(annotations, n), smoothing_k)};
  });
}

gs_status gs_seqmodel_save(const gs_seqmodel* model, const char* path) {
  if (!model || !path) return invalid("gs_seqmodel_save: null argument");
  return guarded([&] { genseg::save_sequence_model(model->m, path); });
}

gs_status gs_seqmodel_load(const char* path, gs_seqmodel** out) {
  if (!path || !out) return invalid("gs_seqmodel_load: null argument");
  return guarded([&] { *out = new gs_seqmodel{genseg::load_sequence_model(path)}; });
}

int gs_seqmodel_kind(const gs_seqmodel* model) {
  if (!model) return 0;
  return model->m.kind == genseg::SequenceModelKind::path_grammar ? 1 : 2;
}

gs_status gs_seqmodel_accepts(const gs_seqmodel* model, const char* const* labels,
                              size_t n, int* out) {
  if (!model || !labels || !out) return invalid("gs_seqmodel_accepts: null argument");
  return guarded([&] {
    const std::vector<std::string> s(labels, labels + n);
    *out = model->m.accepts(s) ? 1 : 0;
  });
}

gs_status gs_seqmodel_log_prior(const gs_seqmodel* model, const char* const* labels,
                                size_t n, double* out) {
  if (!model || !labels || !out) return invalid("gs_seqmodel_log_prior: null argument");
  return guarded([&] {
    const std::vector<std::string> s(labels, labels + n);
    *out = genseg::sequence_log_prior(model->m, s);
  });
}

void gs_seqmodel_free(gs_seqmodel* model) { delete model; }

/* ---- decoding ------------------------------------------------------------ */

void gs_decode_opts_init(gs_decode_opts* opts) {
  if (!opts) return;
  opts->insertion_penalty = 0.0;
  opts->beam = 0.0;
}

gs_status gs_decode(const gs_seq* seq, const gs_hmmset* hmms, const gs_seqmodel* model,
                    const gs_decode_opts* opts, gs_segmentation** out) {
  if (!seq || !hmms || !model || !out) return invalid("gs_decode: null argument");
  return guarded([&] {
    *out = new gs_segmentation{
        genseg::decode(seq->m, hmms->m, model->m, decode_config(opts))};
  });
}

gs_status gs_classify(const gs_seq* seq, const gs_hmmset* const* hmms,
                      const gs_seqmodel* const* models, size_t n,
                      const gs_decode_opts* opts, int* best, double* scores) {
  if (!seq || !hmms || !models) return invalid("gs_classify: null argument");
  return guarded([&] {
    std::vector<genseg::ActivityBundle> bundles(n);
    for (size_t i = 0; i < n; ++i) {
      genseg::require(hmms[i] && models[i], "gs_classify: null bundle entry");
      bundles[i] = {std::to_string(i), &hmms[i]->m, &models[i]->m};
    }
    const auto result =
        genseg::classify_activity(seq->m, bundles, decode_config(opts),
                                  genseg::resolve_threads(0));
    if (best) *best = static_cast<int>(result.best_index);
    if (scores) std::copy(result.scores.begin(), result.scores.end(), scores);
  });
}

/* ---- segmentations --------------------------------------------------------- */

gs_status gs_segmentation_create(const char* const* labels, const uint32_t* starts,
                                 const uint32_t* ends, size_t n_spans,
                                 gs_segmentation** out) {
  if (!labels || !starts || !ends || !out)
    return invalid("gs_segmentation_create: null argument");
  return guarded([&] {
    genseg::Segmentation seg;
    for (size_t i = 0; i < n_spans; ++i)
      seg.spans.push_back({labels[i], starts[i], ends[i], 0.0});
    genseg::require(n_spans > 0, "gs_segmentation_create: no spans");
    seg.frames = ends[n_spans - 1];
    seg.validate();
    *out = new gs_segmentation{std::move(seg)};
  });
}

gs_status gs_segmentation_save(const gs_segmentation* seg, const char* path) {
  if (!seg || !path) return invalid("gs_segmentation_save: null argument");
  return guarded([&] { genseg::save_segmentation(seg->m, path); });
}

gs_status gs_segmentation_save_annotation(const gs_segmentation* seg, const char* path) {
  if (!seg || !path) return invalid("gs_segmentation_save_annotation: null argument");
  return guarded([&] { genseg::save_annotation(seg->m, path); });
}

gs_status gs_segmentation_load(const char* path, gs_segmentation** out) {
  if (!path || !out) return invalid("gs_segmentation_load: null argument");
  return guarded([&] { *out = new gs_segmentation{genseg::load_segmentation(path)}; });
}

uint32_t gs_segmentation_spans(const gs_segmentation* seg) {
  return seg ? static_cast<uint32_t>(seg->m.spans.size()) : 0;
}

uint32_t gs_segmentation_frames(const gs_segmentation* seg) {
  return seg ? static_cast<uint32_t>(seg->m.frames) : 0;
}

double gs_segmentation_total_score(const gs_segmentation* seg) {
  return seg ? seg->m.total_log_score : 0.0;
}

const char* gs_segmentation_span_label(const gs_segmentation* seg, uint32_t i) {
  if (!seg || i >= seg->m.spans.size()) return nullptr;
  return seg->m.spans[i].label.c_str();
}

uint32_t gs_segmentation_span_start(const gs_segmentation* seg, uint32_t i) {
  if (!seg || i >= seg->m.spans.size()) return 0;
  return static_cast<uint32_t>(seg->m.spans[i].start);
}

uint32_t gs_segmentation_span_end(const gs_segmentation* seg, uint32_t i) {
  if (!seg || i >= seg->m.spans.size()) return 0;
  return static_cast<uint32_t>(seg->m.spans[i].end);
}

double gs_segmentation_span_score(const gs_segmentation* seg, uint32_t i) {
  if (!seg || i >= seg->m.spans.size()) return 0.0;
  return seg->m.spans[i].log_score;
}

void gs_segmentation_free(gs_segmentation* seg) { delete seg; }

/* ---- evaluation -------------------------------------------------------------- */

gs_status gs_eval_frame_accuracy(const gs_segmentation* gt, const gs_segmentation* pred,
                                 double* out) {
  if (!gt || !pred || !out) return invalid("gs_eval_frame_accuracy: null argument");
  return guarded([&] { *out = genseg::frame_accuracy(gt->m, pred->m); });
}

gs_status gs_eval_midpoint_counts(const gs_segmentation* gt, const gs_segmentation* pred,
                                  uint64_t* hits, uint64_t* total) {
  if (!gt || !pred || !hits || !total)
    return invalid("gs_eval_midpoint_counts: null argument");
  return guarded([&] {
    std::size_t h = 0, t = 0;
    genseg::midpoint_hit_counts(gt->m, pred->m, h, t);
    *hits = h;
    *total = t;
  });
}

gs_status gs_eval_activity_accuracy(const char* const* gt, const char* const* pred,
                                    size_t n, double* out) {
  if (!gt || !pred || !out) return invalid("gs_eval_activity_accuracy: null argument");
  return guarded([&] {
    const std::vector<std::string> a(gt, gt + n), b(pred, pred + n);
    *out = genseg::activity_accuracy(a, b);
  });
}

namespace {

genseg::LabelFilter make_filter(const char* const* exclude, size_t n) {
  genseg::LabelFilter out;
  for (size_t i = 0; i < n; ++i)
    if (exclude && exclude[i]) out.insert(exclude[i]);
  return out;
}

}  // namespace

gs_status gs_eval_frame_accuracy_ex(const gs_segmentation* gt, const gs_segmentation* pred,
                                    const char* const* exclude, size_t n_exclude,
                                    double* out) {
  if (!gt || !pred || !out) return invalid("gs_eval_frame_accuracy_ex: null argument");
  return guarded([&] {
    *out = genseg::frame_accuracy(gt->m, pred->m, make_filter(exclude, n_exclude));
  });
}

gs_status gs_eval_midpoint_counts_ex(const gs_segmentation* gt, const gs_segmentation* pred,
                                     const char* const* exclude, size_t n_exclude,
                                     uint64_t* hits, uint64_t* total) {
  if (!gt || !pred || !hits || !total)
    return invalid("gs_eval_midpoint_counts_ex: null argument");
  return guarded([&] {
    std::size_t h = 0, t = 0;
    genseg::midpoint_hit_counts(gt->m, pred->m, h, t, make_filter(exclude, n_exclude));
    *hits = h;
    *total = t;
  });
}

gs_status gs_confusion_create(gs_confusion** out) {
  if (!out) return invalid("gs_confusion_create: null argument");
  *out = new gs_confusion{};
  return GS_OK;
}

gs_status gs_confusion_add(gs_confusion* cm, const gs_segmentation* gt,
                           const gs_segmentation* pred) {
  if (!cm || !gt || !pred) return invalid("gs_confusion_add: null argument");
  return guarded([&] { cm->m.add(gt->m, pred->m); });
}

gs_status gs_confusion_add_ex(gs_confusion* cm, const gs_segmentation* gt,
                              const gs_segmentation* pred, const char* const* exclude,
                              size_t n_exclude) {
  if (!cm || !gt || !pred) return invalid("gs_confusion_add_ex: null argument");
  return guarded([&] { cm->m.add(gt->m, pred->m, make_filter(exclude, n_exclude)); });
}

gs_status gs_confusion_class_mean(const gs_confusion* cm, double* out) {
  if (!cm || !out) return invalid("gs_confusion_class_mean: null argument");
  return guarded([&] { *out = genseg::class_mean_accuracy(cm->m); });
}

gs_status gs_confusion_frame_accuracy(const gs_confusion* cm, double* out) {
  if (!cm || !out) return invalid("gs_confusion_frame_accuracy: null argument");
  return guarded([&] {
    genseg::require(cm->m.total() > 0.0, "gs_confusion_frame_accuracy: empty matrix");
    *out = cm->m.trace() / cm->m.total();
  });
}

gs_status gs_confusion_csv(const gs_confusion* cm, char** out) {
  if (!cm || !out) return invalid("gs_confusion_csv: null argument");
  return guarded([&] { *out = dup_string(cm->m.to_csv()); });
}

void gs_confusion_free(gs_confusion* cm) { delete cm; }

/* ---- synthetic data ------------------------------------------------------------ */

gs_status gs_dataspec_load(const char* path, gs_dataspec** out) {
  if (!path || !out) return invalid("gs_dataspec_load: null argument");
  return guarded([&] {
    *out = new gs_dataspec{genseg::parse_dataset_spec(genseg::read_text_file(path))};
  });
}

gs_status gs_dataspec_demo(gs_dataspec** out) {
  if (!out) return invalid("gs_dataspec_demo: null argument");
  return guarded([&] { *out = new gs_dataspec{genseg::demo_dataset_spec()}; });
}

gs_status gs_dataspec_set_seed(gs_dataspec* spec, uint64_t seed) {
  if (!spec) return invalid("gs_dataspec_set_seed: null argument");
  spec->m.seed = seed;
  return GS_OK;
}

gs_status gs_dataspec_text(const gs_dataspec* spec, char** out) {
  if (!spec || !out) return invalid("gs_dataspec_text: null argument");
  return guarded([&] { *out = dup_string(genseg::dataset_spec_to_text(spec->m)); });
}

void gs_dataspec_free(gs_dataspec* spec) { delete spec; }

gs_status gs_dataset_generate(const gs_dataspec* spec, gs_dataset** out) {
  if (!spec || !out) return invalid("gs_dataset_generate: null argument");
  return guarded([&] { *out = new gs_dataset{genseg::generate_dataset(spec->m)}; });
}

uint32_t gs_dataset_count(const gs_dataset* ds, int test_split) {
  if (!ds) return 0;
  return static_cast<uint32_t>(test_split ? ds->m.test_sequences.size()
                                          : ds->m.train_sequences.size());
}

gs_status gs_dataset_sequence(const gs_dataset* ds, int test_split, uint32_t i,
                              gs_seq** out) {
  if (!ds || !out) return invalid("gs_dataset_sequence: null argument");
  return guarded([&] {
    const auto& list = test_split ? ds->m.test_sequences : ds->m.train_sequences;
    genseg::require(i < list.size(), "gs_dataset_sequence: index out of range");
    *out = new gs_seq{list[i]};
  });
}

gs_status gs_dataset_annotation(const gs_dataset* ds, int test_split, uint32_t i,
                                gs_segmentation** out) {
  if (!ds || !out) return invalid("gs_dataset_annotation: null argument");
  return guarded([&] {
    const auto& list = test_split ? ds->m.test_annotations : ds->m.train_annotations;
    genseg::require(i < list.size(), "gs_dataset_annotation: index out of range");
    *out = new gs_segmentation{list[i]};
  });
}

void gs_dataset_free(gs_dataset* ds) { delete ds; }

}  // extern "C"
