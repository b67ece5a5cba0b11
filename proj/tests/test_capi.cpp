// Exercises the shared-library surface the way an external client would:
// only genseg.h, opaque handles, and status codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <genseg.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("genseg-capi-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

gs_seq* make_seq(std::size_t frames, std::size_t dim, unsigned seed, double shift = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(shift, 1.0);
  std::vector<double> data(frames * dim);
  for (auto& v : data) v = normal(rng);
  gs_seq* seq = nullptr;
  REQUIRE(gs_seq_create(data.data(), static_cast<uint32_t>(frames),
                        static_cast<uint32_t>(dim), &seq) == GS_OK);
  return seq;
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  CHECK(std::strlen(gs_version()) > 0);
  CHECK(gs_last_error() != nullptr);
}

TEST_CASE("null arguments yield GS_EINVAL with a message") {
  CHECK(gs_seq_load(nullptr, nullptr) == GS_EINVAL);
  CHECK(std::strlen(gs_last_error()) > 0);
}

TEST_CASE("sequence create / save / load round trip") {
  TempDir dir;
  gs_seq* seq = make_seq(12, 3, 1);
  CHECK(gs_seq_frames(seq) == 12);
  CHECK(gs_seq_dim(seq) == 3);
  REQUIRE(gs_seq_save(seq, dir.file("s.gseq").c_str()) == GS_OK);

  gs_seq* loaded = nullptr;
  REQUIRE(gs_seq_load(dir.file("s.gseq").c_str(), &loaded) == GS_OK);
  CHECK(gs_seq_frames(loaded) == 12);
  // float32 storage: loaded values equal the float-cast originals
  for (std::size_t i = 0; i < 36; ++i)
    CHECK(gs_seq_data(loaded)[i] ==
          static_cast<double>(static_cast<float>(gs_seq_data(seq)[i])));
  gs_seq_free(loaded);

  gs_seq* missing = nullptr;
  CHECK(gs_seq_load(dir.file("absent.gseq").c_str(), &missing) == GS_EIO);
  gs_seq_free(seq);
}

TEST_CASE("GMM fit, persistence, and queries through the C API") {
  TempDir dir;
  gs_seq* samples = make_seq(300, 2, 2);
  gs_gmm_fit_opts opts;
  gs_gmm_fit_opts_init(&opts);
  opts.seed = 3;
  gs_gmm* gmm = nullptr;
  REQUIRE(gs_gmm_fit(samples, 2, &opts, &gmm) == GS_OK);
  CHECK(gs_gmm_components(gmm) == 2);
  CHECK(gs_gmm_dim(gmm) == 2);

  const double x[2] = {0.1, -0.4};
  double post[2] = {0, 0};
  REQUIRE(gs_gmm_posteriors(gmm, x, 2, post) == GS_OK);
  CHECK(std::abs(post[0] + post[1] - 1.0) < 1e-12);
  double ll = 0.0;
  REQUIRE(gs_gmm_log_likelihood(gmm, x, 2, &ll) == GS_OK);
  CHECK(std::isfinite(ll));

  REQUIRE(gs_gmm_save(gmm, dir.file("m.gmm").c_str()) == GS_OK);
  gs_gmm* loaded = nullptr;
  REQUIRE(gs_gmm_load(dir.file("m.gmm").c_str(), &loaded) == GS_OK);
  double ll2 = 0.0;
  REQUIRE(gs_gmm_log_likelihood(loaded, x, 2, &ll2) == GS_OK);
  CHECK(ll2 == ll);

  gs_seq* draws = nullptr;
  REQUIRE(gs_gmm_sample(gmm, 50, 7, &draws) == GS_OK);
  CHECK(gs_seq_frames(draws) == 50);

  gs_seq_free(draws);
  gs_gmm_free(loaded);
  gs_gmm_free(gmm);
  gs_seq_free(samples);
}

TEST_CASE("Fisher encoding and PCA through the C API") {
  gs_seq* samples = make_seq(400, 2, 4);
  gs_gmm_fit_opts opts;
  gs_gmm_fit_opts_init(&opts);
  gs_gmm* gmm = nullptr;
  REQUIRE(gs_gmm_fit(samples, 4, &opts, &gmm) == GS_OK);
  CHECK(gs_fv_dim(gmm) == 16);

  gs_seq* seq = make_seq(40, 2, 5);
  gs_seq* encoded = nullptr;
  REQUIRE(gs_fv_encode_frames(gmm, seq, 20, 1, &encoded) == GS_OK);
  CHECK(gs_seq_frames(encoded) == 40);
  CHECK(gs_seq_dim(encoded) == 16);

  std::vector<double> raw(16);
  REQUIRE(gs_fv_encode(gmm, seq, raw.data()) == GS_OK);
  gs_fv_power_normalize(raw.data(), raw.size());
  gs_fv_l2_normalize(raw.data(), raw.size());
  double norm = 0.0;
  for (double v : raw) norm += v * v;
  CHECK(std::abs(norm - 1.0) < 1e-10);

  gs_pca* pca = nullptr;
  REQUIRE(gs_pca_fit(encoded, 4, 1, &pca) == GS_OK);
  CHECK(gs_pca_in_dim(pca) == 16);
  CHECK(gs_pca_out_dim(pca) == 4);
  gs_seq* reduced = nullptr;
  REQUIRE(gs_pca_project(pca, encoded, &reduced) == GS_OK);
  CHECK(gs_seq_dim(reduced) == 4);
  gs_seq* clipped = nullptr;
  REQUIRE(gs_seq_clip_l2(reduced, &clipped) == GS_OK);

  gs_seq_free(clipped);
  gs_seq_free(reduced);
  gs_pca_free(pca);
  gs_seq_free(encoded);
  gs_seq_free(seq);
  gs_gmm_free(gmm);
  gs_seq_free(samples);
}

TEST_CASE("normality outputs through the C API") {
  std::mt19937 rng(6);
  std::normal_distribution<double> normal;
  std::vector<double> sample(500);
  for (auto& v : sample) v = normal(rng);
  double stat = 0, p = 0;
  int pass = 0;
  REQUIRE(gs_normality_jarque_bera(sample.data(), sample.size(), 0.05, &stat, &p,
                                   &pass) == GS_OK);
  CHECK(p > 0.0);
  REQUIRE(gs_normality_lilliefors(sample.data(), sample.size(), 0.05, &stat, &p,
                                  &pass) == GS_OK);
  CHECK(stat > 0.0);

  gs_seq* data = make_seq(300, 4, 7);
  const double alphas[2] = {0.1, 0.01};
  char* csv = nullptr;
  REQUIRE(gs_normality_report(data, alphas, 2, 200, 1, 1, &csv) == GS_OK);
  CHECK(std::string(csv).rfind("test,alpha,fraction_pass", 0) == 0);
  gs_string_free(csv);
  gs_seq_free(data);
}

TEST_CASE("segment sets, training, decoding, and metrics end to end") {
  TempDir dir;
  gs_segset* set = nullptr;
  REQUIRE(gs_segset_create(&set) == GS_OK);
  // two units with separated emissions, several segments each
  for (int i = 0; i < 6; ++i) {
    gs_seq* a = make_seq(10 + i, 2, 100 + i, 0.0);
    gs_seq* b = make_seq(12 + i, 2, 200 + i, 8.0);
    REQUIRE(gs_segset_add(set, "low", a) == GS_OK);
    REQUIRE(gs_segset_add(set, "high", b) == GS_OK);
    gs_seq_free(a);
    gs_seq_free(b);
  }
  CHECK(gs_segset_labels(set) == 2);
  CHECK(gs_segset_count(set, "low") == 6);
  REQUIRE(gs_segset_balance(set, 8, 0, 9) == GS_OK);
  CHECK(gs_segset_count(set, "low") == 8);
  CHECK(gs_segset_synthetic_count(set, "low") == 2);

  gs_hmm_train_opts topts;
  gs_hmm_train_opts_init(&topts);
  topts.state_divisor = 6;
  uint32_t skipped = 0;
  gs_hmmset* hmms = nullptr;
  REQUIRE(gs_hmmset_train(set, &topts, &skipped, &hmms) == GS_OK);
  CHECK(gs_hmmset_units(hmms) == 2);
  CHECK(gs_hmmset_states(hmms, "low") >= 1);

  REQUIRE(gs_hmmset_save(hmms, dir.file("models").c_str()) == GS_OK);
  gs_hmmset* reloaded = nullptr;
  REQUIRE(gs_hmmset_load(dir.file("models").c_str(), &reloaded) == GS_OK);
  CHECK(gs_hmmset_units(reloaded) == 2);

  // grammar from two annotation handles
  const char* labels_lh[] = {"low", "high"};
  const uint32_t starts[] = {0, 10};
  const uint32_t ends[] = {10, 22};
  gs_segmentation* anno = nullptr;
  REQUIRE(gs_segmentation_create(labels_lh, starts, ends, 2, &anno) == GS_OK);
  const gs_segmentation* annos[] = {anno, anno};
  gs_seqmodel* grammar = nullptr;
  REQUIRE(gs_seqmodel_build_paths(annos, 2, &grammar) == GS_OK);
  CHECK(gs_seqmodel_kind(grammar) == 1);
  int accepted = 0;
  REQUIRE(gs_seqmodel_accepts(grammar, labels_lh, 2, &accepted) == GS_OK);
  CHECK(accepted == 1);
  double prior = 0.0;
  REQUIRE(gs_seqmodel_log_prior(grammar, labels_lh, 2, &prior) == GS_OK);
  CHECK(prior == 0.0);
  const char* oov[] = {"low", "nope"};
  CHECK(gs_seqmodel_log_prior(grammar, oov, 2, &prior) == GS_EOOV);

  // a sequence that switches from the low to the high regime
  std::vector<double> data;
  std::mt19937 rng(11);
  std::normal_distribution<double> low(0.0, 1.0), high(8.0, 1.0);
  for (int t = 0; t < 11; ++t) {
    data.push_back(low(rng));
    data.push_back(low(rng));
  }
  for (int t = 0; t < 13; ++t) {
    data.push_back(high(rng));
    data.push_back(high(rng));
  }
  gs_seq* seq = nullptr;
  REQUIRE(gs_seq_create(data.data(), 24, 2, &seq) == GS_OK);

  gs_decode_opts dopts;
  gs_decode_opts_init(&dopts);
  gs_segmentation* seg = nullptr;
  REQUIRE(gs_decode(seq, reloaded, grammar, &dopts, &seg) == GS_OK);
  REQUIRE(gs_segmentation_spans(seg) == 2);
  CHECK(std::string(gs_segmentation_span_label(seg, 0)) == "low");
  CHECK(std::string(gs_segmentation_span_label(seg, 1)) == "high");
  CHECK(gs_segmentation_frames(seg) == 24);

  // decoded output against the generating annotation
  const uint32_t gt_starts[] = {0, 11};
  const uint32_t gt_ends[] = {11, 24};
  gs_segmentation* gt = nullptr;
  REQUIRE(gs_segmentation_create(labels_lh, gt_starts, gt_ends, 2, &gt) == GS_OK);
  double fa = 0.0;
  REQUIRE(gs_eval_frame_accuracy(gt, seg, &fa) == GS_OK);
  CHECK(fa > 0.8);
  uint64_t hits = 0, total = 0;
  REQUIRE(gs_eval_midpoint_counts(gt, seg, &hits, &total) == GS_OK);
  CHECK(total == 2);

  gs_confusion* cm = nullptr;
  REQUIRE(gs_confusion_create(&cm) == GS_OK);
  REQUIRE(gs_confusion_add(cm, gt, seg) == GS_OK);
  double cma = 0.0;
  REQUIRE(gs_confusion_class_mean(cm, &cma) == GS_OK);
  CHECK(cma > 0.8);
  char* cm_csv = nullptr;
  REQUIRE(gs_confusion_csv(cm, &cm_csv) == GS_OK);
  CHECK(std::string(cm_csv).rfind("label,", 0) == 0);
  gs_string_free(cm_csv);

  // classification with a single bundle
  int best = -1;
  double score = 0.0;
  const gs_hmmset* sets[] = {reloaded};
  const gs_seqmodel* models[] = {grammar};
  REQUIRE(gs_classify(seq, sets, models, 1, &dopts, &best, &score) == GS_OK);
  CHECK(best == 0);
  CHECK(score == gs_segmentation_total_score(seg));

  // a sequence too short for the grammar reports GS_ENOPATH
  gs_seq* tiny = make_seq(1, 2, 12);
  gs_segmentation* none = nullptr;
  CHECK(gs_decode(tiny, reloaded, grammar, &dopts, &none) == GS_ENOPATH);
  gs_seq_free(tiny);

  gs_confusion_free(cm);
  gs_segmentation_free(gt);
  gs_segmentation_free(seg);
  gs_seq_free(seq);
  gs_seqmodel_free(grammar);
  gs_segmentation_free(anno);
  gs_hmmset_free(reloaded);
  gs_hmmset_free(hmms);
  gs_segset_free(set);
}

TEST_CASE("synthetic datasets through the C API") {
  gs_dataspec* spec = nullptr;
  REQUIRE(gs_dataspec_demo(&spec) == GS_OK);
  REQUIRE(gs_dataspec_set_seed(spec, 21) == GS_OK);
  char* text = nullptr;
  REQUIRE(gs_dataspec_text(spec, &text) == GS_OK);
  CHECK(std::string(text).rfind("genseg-dataspec v1\n", 0) == 0);
  gs_string_free(text);

  gs_dataset* data = nullptr;
  REQUIRE(gs_dataset_generate(spec, &data) == GS_OK);
  CHECK(gs_dataset_count(data, 0) == 60);
  CHECK(gs_dataset_count(data, 1) == 20);
  gs_seq* seq = nullptr;
  REQUIRE(gs_dataset_sequence(data, 1, 0, &seq) == GS_OK);
  gs_segmentation* anno = nullptr;
  REQUIRE(gs_dataset_annotation(data, 1, 0, &anno) == GS_OK);
  CHECK(gs_segmentation_frames(anno) == gs_seq_frames(seq));
  gs_segmentation_free(anno);
  gs_seq_free(seq);
  gs_dataset_free(data);
  gs_dataspec_free(spec);
}
