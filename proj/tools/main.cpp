#include "cli_common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace cli {

std::vector<std::string> gather_inputs(const std::string& path,
                                       const std::vector<std::string>& extensions) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) fail_data("input '" + path + "' does not exist");
  if (fs::is_regular_file(path)) return {path};
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end())
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail_data("no matching input files under '" + path + "'");
  return files;
}

std::vector<std::pair<std::string, std::string>> stem_index(
    const std::string& dir, const std::vector<std::string>& extensions) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> out;
  if (fs::is_regular_file(dir)) {
    out.emplace_back(fs::path(dir).stem().string(), dir);
    return out;
  }
  if (!fs::is_directory(dir)) fail_data("'" + dir + "' is neither file nor directory");
  for (const auto& ext : extensions) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
      const std::string stem = entry.path().stem().string();
      bool seen = false;
      for (const auto& [s, p] : out) seen = seen || s == stem;
      if (!seen) out.emplace_back(stem, entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_output(const std::string& path_or_empty, const std::string& content) {
  if (path_or_empty.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path_or_empty, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open '" + path_or_empty + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail_data("write failure on '" + path_or_empty + "'");
}

}  // namespace cli

int main(int argc, char** argv) {
  CLI::App app{"genseg " + std::string(gs_version()) +
               " - generative temporal segmentation and recognition"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a sectioned key=value file");

  cli::GlobalOpts global;
  app.add_option("--seed", global.seed, "Seed for every random choice")
      ->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  cli::register_fit_gmm(app, global);
  cli::register_encode(app, global);
  cli::register_fit_pca(app, global);
  cli::register_reduce(app, global);
  cli::register_normality(app, global);
  cli::register_train_hmm(app, global);
  cli::register_build_grammar(app, global);
  cli::register_synth(app, global);
  cli::register_decode(app, global);
  cli::register_classify(app, global);
  cli::register_evaluate(app, global);

  // --seed / --threads / --config may follow the subcommand name
  for (auto* sub : app.get_subcommands({})) sub->fallthrough(true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const cli::CommandError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  }
  return 0;
}
