#include <iostream>

#include "cli_common.hpp"

namespace cli {

namespace {

SeqPtr stack_inputs(const std::vector<std::string>& paths, bool csv) {
  std::vector<SeqPtr> seqs;
  std::vector<const gs_seq*> raw;
  for (const auto& p : paths) {
    seqs.push_back(load_seq(p, csv));
    raw.push_back(seqs.back().get());
  }
  gs_seq* stacked = nullptr;
  check(gs_seq_vstack(raw.data(), raw.size(), &stacked));
  return SeqPtr(stacked);
}

std::string output_path_for(const std::string& input, const std::string& out,
                            bool out_is_dir, const char* ext) {
  namespace fs = std::filesystem;
  if (!out_is_dir) return out;
  fs::create_directories(out);
  return (fs::path(out) / fs::path(input).stem()).string() + ext;
}

}  // namespace

void register_fit_gmm(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand("fit-gmm", "Fit the diagonal-GMM codebook to sampled frames");
  auto in = std::make_shared<std::vector<std::string>>();
  auto opt = std::make_shared<gs_gmm_fit_opts>();
  gs_gmm_fit_opts_init(opt.get());
  auto k = std::make_shared<std::uint32_t>(64);
  auto sample = std::make_shared<std::uint32_t>(200000);
  auto out = std::make_shared<std::string>();
  auto csv = std::make_shared<bool>(false);

  cmd->add_option("--in", *in, "Feature files or directories")->required();
  cmd->add_option("-k,--components", *k, "Mixture components")->capture_default_str();
  cmd->add_option("--sample", *sample, "Frames sampled for fitting (0 = all)")
      ->capture_default_str();
  cmd->add_option("--max-iters", opt->max_iters, "EM iteration cap")->capture_default_str();
  cmd->add_option("--tol", opt->tol, "Per-frame log-likelihood gain to stop EM")
      ->capture_default_str();
  cmd->add_option("--variance-floor", opt->variance_floor,
                  "Relative per-dimension variance floor")
      ->capture_default_str();
  cmd->add_flag("--csv", *csv, "Inputs are CSV rather than GSEQ1");
  cmd->add_option("-o,--out", *out, "Model file to write")->required();

  cmd->callback([&global, in, opt, k, sample, out, csv] {
    std::vector<std::string> files;
    for (const auto& p : *in)
      for (auto& f : gather_inputs(p, {*csv ? ".csv" : ".gseq"})) files.push_back(f);
    SeqPtr pooled = stack_inputs(files, *csv);
    SeqPtr fitted_on = std::move(pooled);
    if (*sample > 0 && *sample < gs_seq_frames(fitted_on.get())) {
      gs_seq* sub = nullptr;
      check(gs_seq_sample_rows(fitted_on.get(), *sample, global.seed, &sub));
      fitted_on.reset(sub);
    }
    opt->seed = global.seed;
    opt->threads = global.threads;
    gs_gmm* gmm = nullptr;
    check(gs_gmm_fit(fitted_on.get(), *k, opt.get(), &gmm));
    GmmPtr model(gmm);
    check(gs_gmm_save(model.get(), out->c_str()));
    std::cout << "fit-gmm: K=" << gs_gmm_components(model.get())
              << " D=" << gs_gmm_dim(model.get()) << " frames="
              << gs_seq_frames(fitted_on.get()) << " -> " << *out << "\n";
  });
}

void register_encode(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand("encode", "Fisher-vector encode frames over a sliding window");
  auto gmm_path = std::make_shared<std::string>();
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto window = std::make_shared<std::uint32_t>(20);
  auto csv = std::make_shared<bool>(false);

  cmd->add_option("--gmm", *gmm_path, "Codebook model file")->required();
  cmd->add_option("--in", *in, "Sequence file or directory")->required();
  cmd->add_option("--window", *window, "Sliding window length in frames")
      ->capture_default_str();
  cmd->add_flag("--csv", *csv, "Inputs are CSV rather than GSEQ1");
  cmd->add_option("-o,--out", *out, "Output file, or directory for directory input")
      ->required();

  cmd->callback([&global, gmm_path, in, out, window, csv] {
    gs_gmm* gmm = nullptr;
    check(gs_gmm_load(gmm_path->c_str(), &gmm));
    GmmPtr model(gmm);
    const auto files = gather_inputs(*in, {*csv ? ".csv" : ".gseq"});
    const bool out_is_dir = files.size() > 1 || std::filesystem::is_directory(*in);
    for (const auto& f : files) {
      SeqPtr seq = load_seq(f, *csv);
      gs_seq* fv = nullptr;
      check(gs_fv_encode_frames(model.get(), seq.get(), *window, global.threads, &fv));
      SeqPtr encoded(fv);
      const std::string target = output_path_for(f, *out, out_is_dir, ".gseq");
      check(gs_seq_save(encoded.get(), target.c_str()));
      std::cout << "encode: " << f << " -> " << target << " ("
                << gs_seq_frames(encoded.get()) << "x" << gs_seq_dim(encoded.get())
                << ")\n";
    }
  });
}

void register_fit_pca(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand("fit-pca", "Fit the PCA reduction on sampled vectors");
  auto in = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();
  auto dim = std::make_shared<std::uint32_t>(64);
  auto sample = std::make_shared<std::uint32_t>(50000);
  auto whiten = std::make_shared<bool>(true);
  auto csv = std::make_shared<bool>(false);

  cmd->add_option("--in", *in, "Encoded files or directories")->required();
  cmd->add_option("--dim", *dim, "Output dimensionality")->capture_default_str();
  cmd->add_option("--sample", *sample, "Rows sampled for fitting (0 = all)")
      ->capture_default_str();
  cmd->add_flag("--whiten,!--no-whiten", *whiten, "Whiten the projection")
      ->capture_default_str();
  cmd->add_flag("--csv", *csv, "Inputs are CSV rather than GSEQ1");
  cmd->add_option("-o,--out", *out, "Model file to write")->required();

  cmd->callback([&global, in, out, dim, sample, whiten, csv] {
    std::vector<std::string> files;
    for (const auto& p : *in)
      for (auto& f : gather_inputs(p, {*csv ? ".csv" : ".gseq"})) files.push_back(f);
    SeqPtr pooled = stack_inputs(files, *csv);
    if (*sample > 0 && *sample < gs_seq_frames(pooled.get())) {
      gs_seq* sub = nullptr;
      check(gs_seq_sample_rows(pooled.get(), *sample, global.seed, &sub));
      pooled.reset(sub);
    }
    gs_pca* pca = nullptr;
    check(gs_pca_fit(pooled.get(), *dim, *whiten ? 1 : 0, &pca));
    PcaPtr model(pca);
    check(gs_pca_save(model.get(), out->c_str()));
    std::cout << "fit-pca: " << gs_pca_in_dim(model.get()) << " -> "
              << gs_pca_out_dim(model.get()) << (*whiten ? " (whitened)" : "") << " -> "
              << *out << "\n";
  });
}

void register_reduce(CLI::App& app, GlobalOpts&) {
  auto* cmd = app.add_subcommand("reduce", "Project encoded frames and L2-normalize per dimension");
  auto pca_path = std::make_shared<std::string>();
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto clip = std::make_shared<bool>(true);
  auto csv = std::make_shared<bool>(false);

  cmd->add_option("--pca", *pca_path, "PCA model file")->required();
  cmd->add_option("--in", *in, "Encoded file or directory")->required();
  cmd->add_flag("--clip-l2,!--no-clip-l2", *clip,
                "Per-dimension L2 normalization over each clip")
      ->capture_default_str();
  cmd->add_flag("--csv", *csv, "Inputs are CSV rather than GSEQ1");
  cmd->add_option("-o,--out", *out, "Output file, or directory for directory input")
      ->required();

  cmd->callback([pca_path, in, out, clip, csv] {
    gs_pca* pca = nullptr;
    check(gs_pca_load(pca_path->c_str(), &pca));
    PcaPtr model(pca);
    const auto files = gather_inputs(*in, {*csv ? ".csv" : ".gseq"});
    const bool out_is_dir = files.size() > 1 || std::filesystem::is_directory(*in);
    for (const auto& f : files) {
      SeqPtr seq = load_seq(f, *csv);
      gs_seq* projected = nullptr;
      check(gs_pca_project(model.get(), seq.get(), &projected));
      SeqPtr reduced(projected);
      if (*clip) {
        gs_seq* clipped = nullptr;
        check(gs_seq_clip_l2(reduced.get(), &clipped));
        reduced.reset(clipped);
      }
      const std::string target = output_path_for(f, *out, out_is_dir, ".gseq");
      check(gs_seq_save(reduced.get(), target.c_str()));
      std::cout << "reduce: " << f << " -> " << target << "\n";
    }
  });
}

void register_normality(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand("normality",
                                 "Per-dimension Lilliefors / Jarque-Bera pass-rate report");
  auto in = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();
  auto alphas = std::make_shared<std::vector<double>>(
      std::vector<double>{0.5, 0.1, 0.05, 0.01, 0.001});
  auto per_dim = std::make_shared<std::uint32_t>(2000);
  auto csv = std::make_shared<bool>(false);

  cmd->add_option("--in", *in, "Data files or directories")->required();
  cmd->add_option("--alphas", *alphas, "Significance levels")->capture_default_str();
  cmd->add_option("--samples-per-dim", *per_dim, "Rows subsampled per dimension")
      ->capture_default_str();
  cmd->add_flag("--csv", *csv, "Inputs are CSV rather than GSEQ1");
  cmd->add_option("-o,--out", *out, "Report CSV (stdout when omitted)");

  cmd->callback([&global, in, out, alphas, per_dim, csv] {
    std::vector<std::string> files;
    for (const auto& p : *in)
      for (auto& f : gather_inputs(p, {*csv ? ".csv" : ".gseq"})) files.push_back(f);
    SeqPtr pooled = stack_inputs(files, *csv);
    const std::uint32_t n =
        std::min(*per_dim, gs_seq_frames(pooled.get()));
    char* report = nullptr;
    check(gs_normality_report(pooled.get(), alphas->data(), alphas->size(), n,
                              global.seed, global.threads, &report));
    StringPtr csv_text(report);
    write_output(*out, csv_text.get());
  });
}

}  // namespace cli
