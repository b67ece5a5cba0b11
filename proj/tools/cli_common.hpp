#pragma once

#include <genseg.h>

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace cli {

// exit codes: 0 success, 1 usage, 2 data error, 3 no decode path
constexpr int kExitData = 2;
constexpr int kExitNoPath = 3;

struct CommandError : std::runtime_error {
  CommandError(int code, const std::string& what)
      : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

inline void check(gs_status status) {
  if (status == GS_OK) return;
  throw CommandError(status == GS_ENOPATH ? kExitNoPath : kExitData, gs_last_error());
}

[[noreturn]] inline void fail_data(const std::string& what) {
  throw CommandError(kExitData, what);
}

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, HandleDeleter<T, Free>>;

using SeqPtr = Handle<gs_seq, gs_seq_free>;
using GmmPtr = Handle<gs_gmm, gs_gmm_free>;
using PcaPtr = Handle<gs_pca, gs_pca_free>;
using HmmSetPtr = Handle<gs_hmmset, gs_hmmset_free>;
using SeqModelPtr = Handle<gs_seqmodel, gs_seqmodel_free>;
using SegPtr = Handle<gs_segmentation, gs_segmentation_free>;
using SegSetPtr = Handle<gs_segset, gs_segset_free>;
using DataSpecPtr = Handle<gs_dataspec, gs_dataspec_free>;
using DatasetPtr = Handle<gs_dataset, gs_dataset_free>;
using ConfusionPtr = Handle<gs_confusion, gs_confusion_free>;

struct StringFree {
  void operator()(char* p) const { gs_string_free(p); }
};
using StringPtr = std::unique_ptr<char, StringFree>;

// Options shared by every subcommand; values may come from --config
// sections, command-line flags win.
struct GlobalOpts {
  std::uint64_t seed = 42;
  std::uint32_t threads = 0;  // 0 = all cores
};

inline SeqPtr load_seq(const std::string& path, bool csv) {
  gs_seq* seq = nullptr;
  check(csv ? gs_seq_load_csv(path.c_str(), &seq) : gs_seq_load(path.c_str(), &seq));
  return SeqPtr(seq);
}

inline SegPtr load_seg(const std::string& path) {
  gs_segmentation* seg = nullptr;
  check(gs_segmentation_load(path.c_str(), &seg));
  return SegPtr(seg);
}

// A single file, or every file with one of the extensions inside a
// directory, sorted by name.
std::vector<std::string> gather_inputs(const std::string& path,
                                       const std::vector<std::string>& extensions);

// stem -> path for every matching file in a directory (later extensions
// do not override earlier ones).
std::vector<std::pair<std::string, std::string>> stem_index(
    const std::string& dir, const std::vector<std::string>& extensions);

std::string format_double(double v);

void write_output(const std::string& path_or_empty, const std::string& content);

// subcommand registrations
void register_fit_gmm(CLI::App& app, GlobalOpts& global);
void register_encode(CLI::App& app, GlobalOpts& global);
void register_fit_pca(CLI::App& app, GlobalOpts& global);
void register_reduce(CLI::App& app, GlobalOpts& global);
void register_normality(CLI::App& app, GlobalOpts& global);
void register_train_hmm(CLI::App& app, GlobalOpts& global);
void register_build_grammar(CLI::App& app, GlobalOpts& global);
void register_synth(CLI::App& app, GlobalOpts& global);
void register_decode(CLI::App& app, GlobalOpts& global);
void register_classify(CLI::App& app, GlobalOpts& global);
void register_evaluate(CLI::App& app, GlobalOpts& global);

}  // namespace cli
