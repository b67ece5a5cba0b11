#include <cstdio>
#include <iostream>

#include "cli_common.hpp"

namespace cli {

void register_train_hmm(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand(
      "train-hmm", "Initialize and Baum-Welch train one unit HMM per label");
  auto features = std::make_shared<std::string>();
  auto annotations = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto opt = std::make_shared<gs_hmm_train_opts>();
  gs_hmm_train_opts_init(opt.get());
  auto min_n = std::make_shared<std::uint32_t>(0);
  auto max_n = std::make_shared<std::uint32_t>(0);

  cmd->add_option("--features", *features, "Reduced sequences (file or directory)")
      ->required();
  cmd->add_option("--annotations", *annotations,
                  "Ground-truth span files (defaults to the features directory)");
  cmd->add_option("--divisor", opt->state_divisor,
                  "States = round(mean unit length / divisor)")
      ->capture_default_str();
  cmd->add_option("--mixtures", opt->mixtures, "Gaussians per state")
      ->capture_default_str();
  cmd->add_option("--bw-iters", opt->bw_max_iters, "Baum-Welch iteration cap")
      ->capture_default_str();
  cmd->add_option("--bw-tol", opt->bw_tol, "Per-frame log-likelihood gain to stop")
      ->capture_default_str();
  cmd->add_option("--variance-floor", opt->variance_floor,
                  "Relative per-dimension variance floor")
      ->capture_default_str();
  cmd->add_option("--min-samples", *min_n,
                  "Oversample classes below this count (0 = off)")
      ->capture_default_str();
  cmd->add_option("--max-samples", *max_n,
                  "Subsample classes above this count (0 = off)")
      ->capture_default_str();
  cmd->add_option("-o,--out-dir", *out_dir, "Directory for <label>.hmm files")
      ->required();

  cmd->callback([&global, features, annotations, out_dir, opt, min_n, max_n] {
    const std::string anno_dir = annotations->empty() ? *features : *annotations;
    const auto seq_files = stem_index(*features, {".gseq"});
    const auto anno_files = stem_index(anno_dir, {".txt", ".seg"});
    if (seq_files.empty()) fail_data("no .gseq sequences under '" + *features + "'");

    gs_segset* raw = nullptr;
    check(gs_segset_create(&raw));
    SegSetPtr segments(raw);
    std::size_t n_paired = 0;
    for (const auto& [stem, seq_path] : seq_files) {
      std::string anno_path;
      for (const auto& [astem, apath] : anno_files)
        if (astem == stem) { anno_path = apath; break; }
      if (anno_path.empty()) continue;
      ++n_paired;
      SeqPtr seq = load_seq(seq_path, false);
      SegPtr anno = load_seg(anno_path);
      if (gs_segmentation_frames(anno.get()) != gs_seq_frames(seq.get()))
        fail_data("'" + anno_path + "' does not cover '" + seq_path + "'");
      for (std::uint32_t i = 0; i < gs_segmentation_spans(anno.get()); ++i) {
        gs_seq* chunk = nullptr;
        check(gs_seq_slice(seq.get(), gs_segmentation_span_start(anno.get(), i),
                           gs_segmentation_span_end(anno.get(), i), &chunk));
        SeqPtr span_frames(chunk);
        check(gs_segset_add(segments.get(), gs_segmentation_span_label(anno.get(), i),
                            span_frames.get()));
      }
    }
    if (n_paired == 0) fail_data("no sequence/annotation pairs found");

    if (*min_n > 0 || *max_n > 0) {
      const std::uint32_t lo = *min_n;
      const std::uint32_t hi = *max_n == 0 ? UINT32_MAX : *max_n;
      if (lo > hi) fail_data("--min-samples exceeds --max-samples");
      check(gs_segset_balance(segments.get(), lo, hi, global.seed));
    }

    opt->seed = global.seed;
    opt->threads = global.threads;
    std::uint32_t skipped = 0;
    gs_hmmset* hmms = nullptr;
    check(gs_hmmset_train(segments.get(), opt.get(), &skipped, &hmms));
    HmmSetPtr set(hmms);
    check(gs_hmmset_save(set.get(), out_dir->c_str()));

    std::cout << "train-hmm: " << n_paired << " sequences, "
              << gs_hmmset_units(set.get()) << " units -> " << *out_dir << "\n";
    for (std::uint32_t i = 0; i < gs_hmmset_units(set.get()); ++i) {
      const char* label = gs_hmmset_label(set.get(), i);
      std::cout << "  " << label << ": S=" << gs_hmmset_states(set.get(), label)
                << " n=" << gs_segset_count(segments.get(), label)
                << " synthetic=" << gs_segset_synthetic_count(segments.get(), label)
                << "\n";
    }
    if (skipped > 0)
      std::cout << "  warning: " << skipped
                << " segment(s) shorter than their unit's state count were skipped\n";
  });
}

void register_build_grammar(CLI::App& app, GlobalOpts&) {
  auto* cmd = app.add_subcommand("build-grammar",
                                 "Build the unit-sequence prior from annotations");
  auto annotations = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto variant = std::make_shared<std::string>("path");
  auto smoothing = std::make_shared<double>(0.01);

  cmd->add_option("--annotations", *annotations, "Annotation files or directory")
      ->required();
  cmd->add_option("--variant", *variant, "path | bigram")
      ->check(CLI::IsMember({"path", "bigram"}))
      ->capture_default_str();
  cmd->add_option("--smoothing-k", *smoothing, "Add-k smoothing for the bigram table")
      ->capture_default_str();
  cmd->add_option("-o,--out", *out, "Grammar file to write")->required();

  cmd->callback([annotations, out, variant, smoothing] {
    const auto files = gather_inputs(*annotations, {".txt", ".seg"});
    std::vector<SegPtr> annos;
    std::vector<const gs_segmentation*> raw;
    for (const auto& f : files) {
      annos.push_back(load_seg(f));
      raw.push_back(annos.back().get());
    }
    gs_seqmodel* model = nullptr;
    if (*variant == "path")
      check(gs_seqmodel_build_paths(raw.data(), raw.size(), &model));
    else
      check(gs_seqmodel_build_bigram(raw.data(), raw.size(), *smoothing, &model));
    SeqModelPtr grammar(model);
    check(gs_seqmodel_save(grammar.get(), out->c_str()));
    std::cout << "build-grammar: " << *variant << " over " << files.size()
              << " annotations -> " << *out << "\n";
  });
}

void register_synth(CLI::App& app, GlobalOpts& global) {
  auto* cmd = app.add_subcommand(
      "synth", "Generate a synthetic labeled dataset from a generator spec");
  auto spec_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();

  cmd->add_option("--spec", *spec_path,
                  "Generator spec file (built-in demo when omitted)");
  cmd->add_option("-o,--out-dir", *out_dir, "Directory for train/ and test/ splits")
      ->required();

  cmd->callback([&global, cmd, spec_path, out_dir] {
    gs_dataspec* spec = nullptr;
    if (spec_path->empty())
      check(gs_dataspec_demo(&spec));
    else
      check(gs_dataspec_load(spec_path->c_str(), &spec));
    DataSpecPtr ds(spec);
    if (cmd->get_parent()->count("--seed") > 0 || spec_path->empty())
      check(gs_dataspec_set_seed(ds.get(), global.seed));

    gs_dataset* data = nullptr;
    check(gs_dataset_generate(ds.get(), &data));
    DatasetPtr dataset(data);

    namespace fs = std::filesystem;
    char* text = nullptr;
    check(gs_dataspec_text(ds.get(), &text));
    StringPtr spec_text(text);
    fs::create_directories(*out_dir);
    write_output((fs::path(*out_dir) / "dataspec.txt").string(), spec_text.get());

    for (const int split : {0, 1}) {
      const fs::path dir = fs::path(*out_dir) / (split ? "test" : "train");
      fs::create_directories(dir);
      for (std::uint32_t i = 0; i < gs_dataset_count(dataset.get(), split); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%03u", i);
        gs_seq* seq = nullptr;
        check(gs_dataset_sequence(dataset.get(), split, i, &seq));
        SeqPtr s(seq);
        check(gs_seq_save(s.get(), (dir / (std::string(name) + ".gseq")).string().c_str()));
        gs_segmentation* anno = nullptr;
        check(gs_dataset_annotation(dataset.get(), split, i, &anno));
        SegPtr a(anno);
        check(gs_segmentation_save_annotation(
            a.get(), (dir / (std::string(name) + ".txt")).string().c_str()));
      }
    }
    std::cout << "synth: " << gs_dataset_count(dataset.get(), 0) << " train / "
              << gs_dataset_count(dataset.get(), 1) << " test sequences -> " << *out_dir
              << "\n";
  });
}

}  // namespace cli
