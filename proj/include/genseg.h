/* genseg: generative temporal segmentation and recognition toolkit.
 *
 * C interface to the pipeline: Fisher-vector frame encoding over a GMM
 * codebook, PCA reduction with whitening, per-dimension normality
 * reports, left-to-right unit HMMs with Baum-Welch training, grammar- or
 * bigram-constrained Viterbi decoding, class balancing, a synthetic
 * dataset generator, and segmentation metrics.
 *
 * All objects are opaque handles owned by the library; every gs_*_free
 * accepts NULL. Functions return GS_OK on success; on failure
 * gs_last_error() describes the problem for the calling thread.
 */

#ifndef GENSEG_H
#define GENSEG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GS_API __declspec(dllexport)
#else
#define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_EINVAL = 1,   /* invalid argument or input data */
  GS_EIO = 2,      /* file could not be read or written */
  GS_EFORMAT = 3,  /* malformed file */
  GS_ENOPATH = 4,  /* no grammar path fits the sequence */
  GS_EOOV = 5,     /* label outside the model vocabulary */
  GS_EINTERNAL = 6
} gs_status;

typedef struct gs_seq gs_seq;                   /* T x D frame sequence */
typedef struct gs_gmm gs_gmm;                   /* diagonal GMM */
typedef struct gs_pca gs_pca;                   /* PCA projection model */
typedef struct gs_hmmset gs_hmmset;             /* unit label -> HMM */
typedef struct gs_seqmodel gs_seqmodel;         /* path grammar or bigram */
typedef struct gs_segmentation gs_segmentation; /* labeled spans over [0, T) */
typedef struct gs_segset gs_segset;             /* labeled training segments */
typedef struct gs_dataspec gs_dataspec;         /* synthetic dataset description */
typedef struct gs_dataset gs_dataset;           /* generated sequences + truth */
typedef struct gs_confusion gs_confusion;       /* frame-level confusion counts */

GS_API const char* gs_version(void);
/* Message for the most recent failure on this thread; never NULL. */
GS_API const char* gs_last_error(void);
GS_API void gs_string_free(char* s);

/* ---- frame sequences ------------------------------------------------ */

GS_API gs_status gs_seq_create(const double* data, uint32_t frames, uint32_t dim,
                               gs_seq** out);
GS_API gs_status gs_seq_load(const char* path, gs_seq** out);        /* GSEQ1 */
GS_API gs_status gs_seq_load_csv(const char* path, gs_seq** out);
GS_API gs_status gs_seq_save(const gs_seq* seq, const char* path);
GS_API uint32_t gs_seq_frames(const gs_seq* seq);
GS_API uint32_t gs_seq_dim(const gs_seq* seq);
/* Row-major contiguous view; valid for the life of the handle. */
GS_API const double* gs_seq_data(const gs_seq* seq);
GS_API gs_status gs_seq_slice(const gs_seq* seq, uint32_t start, uint32_t end,
                              gs_seq** out);
/* Rows of every input stacked in order; all dims must agree. */
GS_API gs_status gs_seq_vstack(const gs_seq* const* seqs, size_t n, gs_seq** out);
/* n rows sampled without replacement (n <= frames), deterministic in seed. */
GS_API gs_status gs_seq_sample_rows(const gs_seq* seq, uint32_t n, uint64_t seed,
                                    gs_seq** out);
/* Each column divided by its norm over the clip (zero columns kept). */
GS_API gs_status gs_seq_clip_l2(const gs_seq* seq, gs_seq** out);
GS_API void gs_seq_free(gs_seq* seq);

/* ---- Gaussian mixtures ---------------------------------------------- */

typedef struct gs_gmm_fit_opts {
  uint32_t max_iters;      /* default 100 */
  double tol;              /* per-sample log-likelihood gain, default 1e-5 */
  double variance_floor;   /* relative to global variance, default 1e-4 */
  uint64_t seed;
  uint32_t threads;        /* 0 = all cores */
} gs_gmm_fit_opts;
GS_API void gs_gmm_fit_opts_init(gs_gmm_fit_opts* opts);

GS_API gs_status gs_gmm_fit(const gs_seq* samples, uint32_t k,
                            const gs_gmm_fit_opts* opts, gs_gmm** out);
GS_API gs_status gs_gmm_save(const gs_gmm* gmm, const char* path);
GS_API gs_status gs_gmm_load(const char* path, gs_gmm** out);
GS_API uint32_t gs_gmm_components(const gs_gmm* gmm);
GS_API uint32_t gs_gmm_dim(const gs_gmm* gmm);
/* out_k must hold gs_gmm_components() values. */
GS_API gs_status gs_gmm_posteriors(const gs_gmm* gmm, const double* x, uint32_t dim,
                                   double* out_k);
GS_API gs_status gs_gmm_log_likelihood(const gs_gmm* gmm, const double* x,
                                       uint32_t dim, double* out);
GS_API gs_status gs_gmm_sample(const gs_gmm* gmm, uint32_t n, uint64_t seed,
                               gs_seq** out);
GS_API void gs_gmm_free(gs_gmm* gmm);

/* ---- Fisher vectors -------------------------------------------------- */

/* Encoded width: 2 * D * K. */
GS_API uint32_t gs_fv_dim(const gs_gmm* gmm);
/* Raw (unnormalized) Fisher vector of the whole feature set. */
GS_API gs_status gs_fv_encode(const gs_gmm* gmm, const gs_seq* features, double* out);
GS_API void gs_fv_power_normalize(double* v, size_t n);
GS_API void gs_fv_l2_normalize(double* v, size_t n);
/* Per-frame sliding-window encoding, each row power- then L2-normalized. */
GS_API gs_status gs_fv_encode_frames(const gs_gmm* gmm, const gs_seq* seq,
                                     uint32_t window, uint32_t threads, gs_seq** out);

/* ---- PCA -------------------------------------------------------------- */

GS_API gs_status gs_pca_fit(const gs_seq* samples, uint32_t out_dim, int whiten,
                            gs_pca** out);
GS_API gs_status gs_pca_save(const gs_pca* pca, const char* path);
GS_API gs_status gs_pca_load(const char* path, gs_pca** out);
GS_API uint32_t gs_pca_in_dim(const gs_pca* pca);
GS_API uint32_t gs_pca_out_dim(const gs_pca* pca);
GS_API gs_status gs_pca_project(const gs_pca* pca, const gs_seq* seq, gs_seq** out);
GS_API void gs_pca_free(gs_pca* pca);

/* ---- normality -------------------------------------------------------- */

/* stat/p/pass outputs are optional (pass NULL to skip). A constant sample
 * is reported as pass = 0 with p = 0 (counted as a rejection). */
GS_API gs_status gs_normality_jarque_bera(const double* x, size_t n, double alpha,
                                          double* stat, double* p, int* pass);
GS_API gs_status gs_normality_lilliefors(const double* x, size_t n, double alpha,
                                         double* stat, double* p, int* pass);
/* CSV report (test,alpha,fraction_pass,n_dims,samples_per_dim); free the
 * string with gs_string_free. */
GS_API gs_status gs_normality_report(const gs_seq* data, const double* alphas,
                                     size_t n_alphas, uint32_t samples_per_dim,
                                     uint64_t seed, uint32_t threads, char** csv_out);

/* ---- training segments ------------------------------------------------ */

GS_API gs_status gs_segset_create(gs_segset** out);
GS_API gs_status gs_segset_add(gs_segset* set, const char* label, const gs_seq* frames);
/* Subsample classes above max_n; synthesize up to min_n via convex
 * combinations of time-rescaled same-class pairs. */
GS_API gs_status gs_segset_balance(gs_segset* set, uint32_t min_n, uint32_t max_n,
                                   uint64_t seed);
GS_API uint32_t gs_segset_labels(const gs_segset* set);
GS_API const char* gs_segset_label(const gs_segset* set, uint32_t index);
GS_API uint32_t gs_segset_count(const gs_segset* set, const char* label);
GS_API uint32_t gs_segset_synthetic_count(const gs_segset* set, const char* label);
GS_API void gs_segset_free(gs_segset* set);

/* ---- unit HMMs --------------------------------------------------------- */

typedef struct gs_hmm_train_opts {
  uint32_t state_divisor;  /* states = round(mean length / divisor), default 10 */
  uint32_t mixtures;       /* Gaussians per state, default 1 */
  uint32_t bw_max_iters;   /* Baum-Welch iterations, default 20 */
  double bw_tol;           /* per-frame log-likelihood gain, default 1e-5 */
  double variance_floor;   /* relative, default 1e-4 */
  uint64_t seed;
  uint32_t threads;
} gs_hmm_train_opts;
GS_API void gs_hmm_train_opts_init(gs_hmm_train_opts* opts);

/* Initializes one left-to-right HMM per label by uniform subdivision and
 * re-estimates it with Baum-Welch. Segments shorter than a unit's state
 * count are skipped; *skipped (optional) receives the total. */
GS_API gs_status gs_hmmset_train(const gs_segset* segments,
                                 const gs_hmm_train_opts* opts, uint32_t* skipped,
                                 gs_hmmset** out);
/* One <label>.hmm file per unit inside dir. */
GS_API gs_status gs_hmmset_save(const gs_hmmset* hmms, const char* dir);
GS_API gs_status gs_hmmset_load(const char* dir, gs_hmmset** out);
GS_API uint32_t gs_hmmset_units(const gs_hmmset* hmms);
GS_API const char* gs_hmmset_label(const gs_hmmset* hmms, uint32_t index);
GS_API uint32_t gs_hmmset_states(const gs_hmmset* hmms, const char* label);
/* Forced alignment of seq to one unit: out_states (optional) must hold
 * gs_seq_frames(seq) entries. */
GS_API gs_status gs_hmmset_align(const gs_hmmset* hmms, const char* label,
                                 const gs_seq* seq, uint32_t* out_states,
                                 double* log_score);
GS_API void gs_hmmset_free(gs_hmmset* hmms);

/* ---- sequence models ---------------------------------------------------- */

/* Annotations are the label sequences of the given segmentations. */
GS_API gs_status gs_seqmodel_build_paths(const gs_segmentation* const* annotations,
                                         size_t n, gs_seqmodel** out);
GS_API gs_status gs_seqmodel_build_bigram(const gs_segmentation* const* annotations,
                                          size_t n, double smoothing_k,
                                          gs_seqmodel** out);
GS_API gs_status gs_seqmodel_save(const gs_seqmodel* model, const char* path);
GS_API gs_status gs_seqmodel_load(const char* path, gs_seqmodel** out);
/* 1 = path grammar, 2 = bigram. */
GS_API int gs_seqmodel_kind(const gs_seqmodel* model);
GS_API gs_status gs_seqmodel_accepts(const gs_seqmodel* model,
                                     const char* const* labels, size_t n, int* out);
/* Log prior of the label sequence; -inf when a path grammar rejects it.
 * Unknown labels fail with GS_EOOV. */
GS_API gs_status gs_seqmodel_log_prior(const gs_seqmodel* model,
                                       const char* const* labels, size_t n,
                                       double* out);
GS_API void gs_seqmodel_free(gs_seqmodel* model);

/* ---- decoding ------------------------------------------------------------ */

typedef struct gs_decode_opts {
  double insertion_penalty; /* added per decoded unit, default 0 */
  double beam;              /* per-frame pruning margin; <= 0 disables */
} gs_decode_opts;
GS_API void gs_decode_opts_init(gs_decode_opts* opts);

GS_API gs_status gs_decode(const gs_seq* seq, const gs_hmmset* hmms,
                           const gs_seqmodel* model, const gs_decode_opts* opts,
                           gs_segmentation** out);
/* Decodes under every (hmms[i], models[i]) bundle; best (optional)
 * receives the arg-max index, scores (optional, length n) the per-activity
 * totals (-inf for no path). */
GS_API gs_status gs_classify(const gs_seq* seq, const gs_hmmset* const* hmms,
                             const gs_seqmodel* const* models, size_t n,
                             const gs_decode_opts* opts, int* best, double* scores);

/* ---- segmentations --------------------------------------------------------- */

GS_API gs_status gs_segmentation_create(const char* const* labels,
                                        const uint32_t* starts, const uint32_t* ends,
                                        size_t n_spans, gs_segmentation** out);
GS_API gs_status gs_segmentation_save(const gs_segmentation* seg, const char* path);
/* Header-less ground-truth format: "label start end" per line. */
GS_API gs_status gs_segmentation_save_annotation(const gs_segmentation* seg,
                                                 const char* path);
/* Accepts decoder output and header-less "label start end" annotations. */
GS_API gs_status gs_segmentation_load(const char* path, gs_segmentation** out);
GS_API uint32_t gs_segmentation_spans(const gs_segmentation* seg);
GS_API uint32_t gs_segmentation_frames(const gs_segmentation* seg);
GS_API double gs_segmentation_total_score(const gs_segmentation* seg);
GS_API const char* gs_segmentation_span_label(const gs_segmentation* seg, uint32_t i);
GS_API uint32_t gs_segmentation_span_start(const gs_segmentation* seg, uint32_t i);
GS_API uint32_t gs_segmentation_span_end(const gs_segmentation* seg, uint32_t i);
GS_API double gs_segmentation_span_score(const gs_segmentation* seg, uint32_t i);
GS_API void gs_segmentation_free(gs_segmentation* seg);

/* ---- evaluation -------------------------------------------------------------- */

GS_API gs_status gs_eval_frame_accuracy(const gs_segmentation* gt,
                                        const gs_segmentation* pred, double* out);
GS_API gs_status gs_eval_midpoint_counts(const gs_segmentation* gt,
                                         const gs_segmentation* pred, uint64_t* hits,
                                         uint64_t* total);
GS_API gs_status gs_eval_activity_accuracy(const char* const* gt,
                                           const char* const* pred, size_t n,
                                           double* out);

/* Variants that drop the given ground-truth labels (background classes)
 * from the evaluation. */
GS_API gs_status gs_eval_frame_accuracy_ex(const gs_segmentation* gt,
                                           const gs_segmentation* pred,
                                           const char* const* exclude, size_t n_exclude,
                                           double* out);
GS_API gs_status gs_eval_midpoint_counts_ex(const gs_segmentation* gt,
                                            const gs_segmentation* pred,
                                            const char* const* exclude,
                                            size_t n_exclude, uint64_t* hits,
                                            uint64_t* total);

GS_API gs_status gs_confusion_create(gs_confusion** out);
GS_API gs_status gs_confusion_add(gs_confusion* cm, const gs_segmentation* gt,
                                  const gs_segmentation* pred);
GS_API gs_status gs_confusion_add_ex(gs_confusion* cm, const gs_segmentation* gt,
                                     const gs_segmentation* pred,
                                     const char* const* exclude, size_t n_exclude);
GS_API gs_status gs_confusion_class_mean(const gs_confusion* cm, double* out);
GS_API gs_status gs_confusion_frame_accuracy(const gs_confusion* cm, double* out);
/* CSV with a label header row and column; free with gs_string_free. */
GS_API gs_status gs_confusion_csv(const gs_confusion* cm, char** out);
GS_API void gs_confusion_free(gs_confusion* cm);

/* ---- synthetic data ------------------------------------------------------------ */

GS_API gs_status gs_dataspec_load(const char* path, gs_dataspec** out);
/* Built-in five-unit demo generator. */
GS_API gs_status gs_dataspec_demo(gs_dataspec** out);
GS_API gs_status gs_dataspec_set_seed(gs_dataspec* spec, uint64_t seed);
GS_API gs_status gs_dataspec_text(const gs_dataspec* spec, char** out);
GS_API void gs_dataspec_free(gs_dataspec* spec);

GS_API gs_status gs_dataset_generate(const gs_dataspec* spec, gs_dataset** out);
GS_API uint32_t gs_dataset_count(const gs_dataset* ds, int test_split);
GS_API gs_status gs_dataset_sequence(const gs_dataset* ds, int test_split, uint32_t i,
                                     gs_seq** out);
GS_API gs_status gs_dataset_annotation(const gs_dataset* ds, int test_split,
                                       uint32_t i, gs_segmentation** out);
GS_API void gs_dataset_free(gs_dataset* ds);

#ifdef __cplusplus
}
#endif

#endif /* GENSEG_H */
