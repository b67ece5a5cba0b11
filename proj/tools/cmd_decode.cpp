#include <fstream>
#include <iostream>
#include <sstream>

#include "cli_common.hpp"

namespace cli {

namespace {

HmmSetPtr load_models(const std::string& dir) {
  gs_hmmset* hmms = nullptr;
  check(gs_hmmset_load(dir.c_str(), &hmms));
  return HmmSetPtr(hmms);
}

SeqModelPtr load_grammar(const std::string& path) {
  gs_seqmodel* model = nullptr;
  check(gs_seqmodel_load(path.c_str(), &model));
  return SeqModelPtr(model);
}

}  // namespace

void register_decode(CLI::App& app, GlobalOpts&) {
  auto* cmd = app.add_subcommand(
      "decode", "Grammar-constrained Viterbi segmentation of feature sequences");
  auto features = std::make_shared<std::string>();
  auto model_dir = std::make_shared<std::string>();
  auto grammar_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto opts = std::make_shared<gs_decode_opts>();
  gs_decode_opts_init(opts.get());

  cmd->add_option("--features", *features, "Reduced sequence file or directory")
      ->required();
  cmd->add_option("--model-dir", *model_dir, "Directory of <label>.hmm files")
      ->required();
  cmd->add_option("--grammar", *grammar_path, "Grammar file")->required();
  cmd->add_option("--penalty", opts->insertion_penalty,
                  "Log-score added per decoded unit")
      ->capture_default_str();
  cmd->add_option("--beam", opts->beam, "Pruning margin per frame (0 = exact)")
      ->capture_default_str();
  cmd->add_option("-o,--out", *out,
                  "Segmentation file, or directory for directory input")
      ->required();

  cmd->callback([features, model_dir, grammar_path, out, opts] {
    HmmSetPtr hmms = load_models(*model_dir);
    SeqModelPtr grammar = load_grammar(*grammar_path);
    const auto files = gather_inputs(*features, {".gseq"});
    const bool out_is_dir =
        files.size() > 1 || std::filesystem::is_directory(*features);
    namespace fs = std::filesystem;
    if (out_is_dir) fs::create_directories(*out);
    for (const auto& f : files) {
      SeqPtr seq = load_seq(f, false);
      gs_segmentation* seg = nullptr;
      check(gs_decode(seq.get(), hmms.get(), grammar.get(), opts.get(), &seg));
      SegPtr result(seg);
      const std::string target =
          out_is_dir ? (fs::path(*out) / fs::path(f).stem()).string() + ".seg" : *out;
      check(gs_segmentation_save(result.get(), target.c_str()));
      std::cout << "decode: " << f << " -> " << target << " (spans="
                << gs_segmentation_spans(result.get())
                << " total=" << format_double(gs_segmentation_total_score(result.get()))
                << ")\n";
    }
  });
}

void register_classify(CLI::App& app, GlobalOpts&) {
  auto* cmd = app.add_subcommand(
      "classify", "Pick the activity whose grammar decodes each sequence best");
  auto features = std::make_shared<std::string>();
  auto manifest = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto opts = std::make_shared<gs_decode_opts>();
  gs_decode_opts_init(opts.get());

  cmd->add_option("--features", *features, "Sequence file or directory")->required();
  cmd->add_option("--activities", *manifest,
                  "Manifest: one 'name hmm_dir grammar_file' per line")
      ->required();
  cmd->add_option("--truth", *truth_path,
                  "Optional 'sequence label' lines for activity accuracy");
  cmd->add_option("--penalty", opts->insertion_penalty,
                  "Log-score added per decoded unit")
      ->capture_default_str();
  cmd->add_option("--beam", opts->beam, "Pruning margin per frame (0 = exact)")
      ->capture_default_str();
  cmd->add_option("-o,--out", *out, "Result CSV (stdout when omitted)");

  cmd->callback([features, manifest, truth_path, out, opts] {
    struct Activity {
      std::string name;
      HmmSetPtr hmms;
      SeqModelPtr grammar;
    };
    std::vector<Activity> activities;
    {
      std::ifstream in(*manifest);
      if (!in) fail_data("cannot open activities manifest '" + *manifest + "'");
      std::string line;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name, hmm_dir, grammar_file;
        if (!(ls >> name >> hmm_dir >> grammar_file)) {
          if (!name.empty()) fail_data("malformed manifest line: '" + line + "'");
          continue;
        }
        activities.push_back({name, load_models(hmm_dir), load_grammar(grammar_file)});
      }
    }
    if (activities.empty()) fail_data("activities manifest is empty");

    std::vector<const gs_hmmset*> hmm_ptrs;
    std::vector<const gs_seqmodel*> model_ptrs;
    for (const auto& a : activities) {
      hmm_ptrs.push_back(a.hmms.get());
      model_ptrs.push_back(a.grammar.get());
    }

    std::map<std::string, std::string> truth;
    if (!truth_path->empty()) {
      std::ifstream in(*truth_path);
      if (!in) fail_data("cannot open truth file '" + *truth_path + "'");
      std::string name, label;
      while (in >> name >> label) truth[name] = label;
    }

    std::string csv = "sequence,predicted";
    for (const auto& a : activities) csv += ",score_" + a.name;
    csv += "\n";

    std::vector<std::string> gt_labels, pred_labels;
    for (const auto& f : gather_inputs(*features, {".gseq"})) {
      SeqPtr seq = load_seq(f, false);
      int best = -1;
      std::vector<double> scores(activities.size());
      check(gs_classify(seq.get(), hmm_ptrs.data(), model_ptrs.data(),
                        activities.size(), opts.get(), &best, scores.data()));
      const std::string stem = std::filesystem::path(f).stem().string();
      csv += stem + "," + activities[static_cast<std::size_t>(best)].name;
      for (double s : scores) csv += "," + format_double(s);
      csv += "\n";
      if (const auto it = truth.find(stem); it != truth.end()) {
        gt_labels.push_back(it->second);
        pred_labels.push_back(activities[static_cast<std::size_t>(best)].name);
      }
    }
    write_output(*out, csv);

    if (!gt_labels.empty()) {
      std::vector<const char*> gt_c, pred_c;
      for (const auto& s : gt_labels) gt_c.push_back(s.c_str());
      for (const auto& s : pred_labels) pred_c.push_back(s.c_str());
      double acc = 0.0;
      check(gs_eval_activity_accuracy(gt_c.data(), pred_c.data(), gt_c.size(), &acc));
      std::cout << "activity_accuracy " << format_double(acc) << " (" << gt_c.size()
                << " sequences)\n";
    }
  });
}

void register_evaluate(CLI::App& app, GlobalOpts&) {
  auto* cmd = app.add_subcommand(
      "evaluate", "Segmentation metrics against ground-truth annotations");
  auto gt_path = std::make_shared<std::string>();
  auto pred_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto confusion_out = std::make_shared<std::string>();
  auto exclude = std::make_shared<std::vector<std::string>>();

  cmd->add_option("--gt", *gt_path, "Ground-truth file or directory")->required();
  cmd->add_option("--pred", *pred_path, "Predicted segmentation file or directory")
      ->required();
  cmd->add_option("--exclude-label", *exclude,
                  "Ground-truth labels dropped from every metric");
  cmd->add_option("--confusion", *confusion_out, "Write the confusion matrix CSV here");
  cmd->add_option("-o,--out", *out, "Metrics CSV (stdout when omitted)");

  cmd->callback([gt_path, pred_path, out, confusion_out, exclude] {
    const auto gt_files = stem_index(*gt_path, {".txt", ".seg"});
    const auto pred_files = stem_index(*pred_path, {".seg", ".txt"});

    std::vector<const char*> excl;
    for (const auto& s : *exclude) excl.push_back(s.c_str());

    gs_confusion* cm_raw = nullptr;
    check(gs_confusion_create(&cm_raw));
    ConfusionPtr cm(cm_raw);

    std::string csv = "metric,name,value\n";
    std::uint64_t hits_total = 0, spans_total = 0;
    std::size_t paired = 0;
    for (const auto& [stem, gt_file] : gt_files) {
      std::string pred_file;
      for (const auto& [pstem, ppath] : pred_files)
        if (pstem == stem) { pred_file = ppath; break; }
      if (pred_file.empty()) continue;
      ++paired;
      SegPtr gt = load_seg(gt_file);
      SegPtr pred = load_seg(pred_file);
      double fa = 0.0;
      check(gs_eval_frame_accuracy_ex(gt.get(), pred.get(), excl.data(), excl.size(),
                                      &fa));
      std::uint64_t hits = 0, total = 0;
      check(gs_eval_midpoint_counts_ex(gt.get(), pred.get(), excl.data(), excl.size(),
                                       &hits, &total));
      check(gs_confusion_add_ex(cm.get(), gt.get(), pred.get(), excl.data(),
                                excl.size()));
      hits_total += hits;
      spans_total += total;
      csv += "frame_accuracy," + stem + "," + format_double(fa) + "\n";
      if (total > 0)
        csv += "midpoint_hit_accuracy," + stem + "," +
               format_double(static_cast<double>(hits) / static_cast<double>(total)) +
               "\n";
    }
    if (paired == 0) fail_data("no ground-truth/prediction pairs share a basename");

    double overall_fa = 0.0, overall_cma = 0.0;
    check(gs_confusion_frame_accuracy(cm.get(), &overall_fa));
    check(gs_confusion_class_mean(cm.get(), &overall_cma));
    csv += "frame_accuracy,overall," + format_double(overall_fa) + "\n";
    csv += "class_mean_accuracy,overall," + format_double(overall_cma) + "\n";
    if (spans_total > 0)
      csv += "midpoint_hit_accuracy,overall," +
             format_double(static_cast<double>(hits_total) /
                           static_cast<double>(spans_total)) +
             "\n";
    write_output(*out, csv);

    if (!confusion_out->empty()) {
      char* cm_csv = nullptr;
      check(gs_confusion_csv(cm.get(), &cm_csv));
      StringPtr text(cm_csv);
      write_output(*confusion_out, text.get());
    }
  });
}

}  // namespace cli
