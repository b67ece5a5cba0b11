#include "core/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace genseg {

namespace {

constexpr char kSeqMagic[5] = {'G', 'S', 'E', 'Q', '1'};

[[noreturn]] void fail_format(const std::string& where, std::size_t byte_offset,
                              const std::string& what) {
  fail(ErrorCode::bad_format,
       where + " (byte " + std::to_string(byte_offset) + "): " + what);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ' ';
    out += fmt17(row[i]);
  }
  out += '\n';
}

// Line-oriented reader that tracks byte offsets for error messages.
class TextCursor {
public:
  TextCursor(const std::string& text, std::string where)
      : text_(text), where_(std::move(where)) {}

  bool next_line(std::string& line) {
    if (pos_ >= text_.size()) return false;
    line_start_ = pos_;
    const auto nl = text_.find('\n', pos_);
    if (nl == std::string::npos) {
      line = text_.substr(pos_);
      pos_ = text_.size();
    } else {
      line = text_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::string expect_line(const std::string& what) {
    std::string line;
    if (!next_line(line)) fail_format(where_, pos_, "unexpected end of file, expected " + what);
    return line;
  }

  [[noreturn]] void fail_here(const std::string& what) const {
    fail_format(where_, line_start_, what);
  }

  std::vector<double> expect_numbers(std::size_t n, const std::string& what) {
    const std::string line = expect_line(what);
    auto values = parse_numbers(line);
    if (values.size() != n)
      fail_here("expected " + std::to_string(n) + " values for " + what + ", got " +
                std::to_string(values.size()));
    return values;
  }

  std::vector<double> parse_numbers(const std::string& line) {
    std::vector<double> out;
    const char* p = line.c_str();
    for (;;) {
      while (*p == ' ' || *p == '\t' || *p == ',') ++p;
      if (!*p) break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) fail_here("malformed number near '" + std::string(p).substr(0, 12) + "'");
      out.push_back(v);
      p = end;
    }
    return out;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  std::size_t offset() const { return line_start_; }
  const std::string& where() const { return where_; }

private:
  const std::string& text_;
  std::string where_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// header of the form "<tag> v1 key=<v> key=<v> ..."
std::map<std::string, std::string> parse_header(TextCursor& cur, const std::string& tag) {
  const std::string line = cur.expect_line(tag + " header");
  const auto toks = split_tokens(line);
  if (toks.size() < 2 || toks[0] != tag || toks[1] != "v1")
    cur.fail_here("expected '" + tag + " v1' header");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 2; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos) cur.fail_here("malformed header field '" + toks[i] + "'");
    kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return kv;
}

std::size_t header_count(TextCursor& cur, std::map<std::string, std::string>& kv,
                         const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) cur.fail_here("header is missing " + key + "=");
  return static_cast<std::size_t>(std::stoull(it->second));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

DiagonalGmm gmm_from_cursor(TextCursor& cur) {
  auto kv = parse_header(cur, "genseg-gmm");
  const std::size_t k = header_count(cur, kv, "K");
  const std::size_t dim = header_count(cur, kv, "D");
  DiagonalGmm gmm;
  gmm.weights = cur.expect_numbers(k, "mixture weights");
  gmm.means = Matrix(k, dim);
  gmm.variances = Matrix(k, dim);
  for (std::size_t c = 0; c < k; ++c) {
    const auto row = cur.expect_numbers(dim, "mean row");
    std::copy(row.begin(), row.end(), gmm.means.row(c).data());
  }
  for (std::size_t c = 0; c < k; ++c) {
    const auto row = cur.expect_numbers(dim, "variance row");
    std::copy(row.begin(), row.end(), gmm.variances.row(c).data());
  }
  gmm.validate();
  return gmm;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io_failure, "read failure on '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io_failure, "write failure on '" + path + "'");
}

Matrix load_sequence(const std::string& path) {
  const std::string raw = read_text_file(path);
  if (raw.size() < 13 || std::memcmp(raw.data(), kSeqMagic, 5) != 0)
    fail_format(path, 0, "not a GSEQ1 frame-sequence file");
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const std::uint32_t t_len = get_u32(p + 5);
  const std::uint32_t dim = get_u32(p + 9);
  const std::size_t expect = 13 + static_cast<std::size_t>(t_len) * dim * 4;
  if (t_len == 0 || dim == 0) fail_format(path, 5, "empty frame sequence");
  if (raw.size() != expect)
    fail_format(path, raw.size(),
                "truncated payload: expected " + std::to_string(expect) + " bytes");
  Matrix seq(t_len, dim);
  for (std::size_t i = 0; i < static_cast<std::size_t>(t_len) * dim; ++i) {
    float f;
    std::memcpy(&f, raw.data() + 13 + i * 4, 4);
    seq.storage()[i] = static_cast<double>(f);
  }
  return seq;
}

void save_sequence(const Matrix& seq, const std::string& path) {
  require(seq.rows() >= 1 && seq.cols() >= 1, "save_sequence: empty sequence");
  require(seq.rows() <= UINT32_MAX && seq.cols() <= UINT32_MAX,
          "save_sequence: sequence too large");
  std::string out;
  out.reserve(13 + seq.storage().size() * 4);
  out.append(kSeqMagic, 5);
  put_u32(out, static_cast<std::uint32_t>(seq.rows()));
  put_u32(out, static_cast<std::uint32_t>(seq.cols()));
  for (double v : seq.storage()) {
    const float f = static_cast<float>(v);
    char bytes[4];
    std::memcpy(bytes, &f, 4);
    out.append(bytes, 4);
  }
  write_text_file(path, out);
}

Matrix load_sequence_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  TextCursor cur(text, path);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  std::string line;
  while (cur.next_line(line)) {
    if (line.empty()) continue;
    const auto row = cur.parse_numbers(line);
    if (row.empty()) continue;
    if (cols == 0) cols = row.size();
    if (row.size() != cols) cur.fail_here("ragged row: expected " + std::to_string(cols) + " columns");
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) fail_format(path, 0, "no numeric rows");
  return Matrix(rows, cols, std::move(values));
}

std::string gmm_to_text(const DiagonalGmm& gmm) {
  gmm.validate();
  std::string out = "genseg-gmm v1 K=" + std::to_string(gmm.components()) +
                    " D=" + std::to_string(gmm.dim()) + "\n";
  append_row(out, gmm.weights);
  for (std::size_t c = 0; c < gmm.components(); ++c) append_row(out, gmm.means.row(c));
  for (std::size_t c = 0; c < gmm.components(); ++c) append_row(out, gmm.variances.row(c));
  return out;
}

DiagonalGmm gmm_from_text(const std::string& text) {
  TextCursor cur(text, "gmm text");
  return gmm_from_cursor(cur);
}

void save_gmm(const DiagonalGmm& gmm, const std::string& path) {
  write_text_file(path, gmm_to_text(gmm));
}

DiagonalGmm load_gmm(const std::string& path) {
  const std::string text = read_text_file(path);
  TextCursor cur(text, path);
  return gmm_from_cursor(cur);
}

std::string pca_to_text(const PcaModel& pca) {
  std::string out = "genseg-pca v1 M=" + std::to_string(pca.in_dim()) +
                    " Dp=" + std::to_string(pca.out_dim()) +
                    " whiten=" + (pca.whiten ? "1" : "0") + " eps=" + fmt17(pca.epsilon) +
                    "\n";
  append_row(out, pca.mean);
  append_row(out, pca.eigenvalues);
  for (std::size_t r = 0; r < pca.in_dim(); ++r) append_row(out, pca.basis.row(r));
  return out;
}

PcaModel pca_from_text(const std::string& text) {
  TextCursor cur(text, "pca text");
  auto kv = parse_header(cur, "genseg-pca");
  PcaModel pca;
  const std::size_t m = header_count(cur, kv, "M");
  const std::size_t dp = header_count(cur, kv, "Dp");
  if (auto it = kv.find("whiten"); it != kv.end()) pca.whiten = it->second == "1";
  if (auto it = kv.find("eps"); it != kv.end()) pca.epsilon = std::strtod(it->second.c_str(), nullptr);
  pca.mean = cur.expect_numbers(m, "mean");
  pca.eigenvalues = cur.expect_numbers(dp, "eigenvalues");
  pca.basis = Matrix(m, dp);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = cur.expect_numbers(dp, "basis row");
    std::copy(row.begin(), row.end(), pca.basis.row(r).data());
  }
  return pca;
}

void save_pca(const PcaModel& pca, const std::string& path) {
  write_text_file(path, pca_to_text(pca));
}

PcaModel load_pca(const std::string& path) {
  const std::string text = read_text_file(path);
  TextCursor cur(text, path);
  auto kv = parse_header(cur, "genseg-pca");
  PcaModel pca;
  const std::size_t m = header_count(cur, kv, "M");
  const std::size_t dp = header_count(cur, kv, "Dp");
  if (auto it = kv.find("whiten"); it != kv.end()) pca.whiten = it->second == "1";
  if (auto it = kv.find("eps"); it != kv.end()) pca.epsilon = std::strtod(it->second.c_str(), nullptr);
  pca.mean = cur.expect_numbers(m, "mean");
  pca.eigenvalues = cur.expect_numbers(dp, "eigenvalues");
  pca.basis = Matrix(m, dp);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = cur.expect_numbers(dp, "basis row");
    std::copy(row.begin(), row.end(), pca.basis.row(r).data());
  }
  return pca;
}

std::string hmm_to_text(const UnitHmm& hmm) {
  hmm.validate();
  std::string out = "genseg-hmm v1 label=" + hmm.label +
                    " S=" + std::to_string(hmm.state_count()) +
                    " D=" + std::to_string(hmm.dim()) + "\n";
  for (std::size_t j = 0; j < hmm.state_count(); ++j)
    out += fmt17(hmm.self_prob[j]) + " " + fmt17(hmm.next_prob[j]) + "\n";
  for (const auto& state : hmm.states) out += gmm_to_text(state);
  return out;
}

UnitHmm hmm_from_text(const std::string& text) {
  TextCursor cur(text, "hmm text");
  auto kv = parse_header(cur, "genseg-hmm");
  UnitHmm hmm;
  const auto label = kv.find("label");
  if (label == kv.end()) cur.fail_here("header is missing label=");
  hmm.label = label->second;
  const std::size_t s_count = header_count(cur, kv, "S");
  for (std::size_t j = 0; j < s_count; ++j) {
    const auto row = cur.expect_numbers(2, "transition row");
    hmm.self_prob.push_back(row[0]);
    hmm.next_prob.push_back(row[1]);
  }
  for (std::size_t j = 0; j < s_count; ++j) hmm.states.push_back(gmm_from_cursor(cur));
  hmm.validate();
  return hmm;
}

void save_hmm(const UnitHmm& hmm, const std::string& path) {
  write_text_file(path, hmm_to_text(hmm));
}

UnitHmm load_hmm(const std::string& path) {
  const std::string text = read_text_file(path);
  TextCursor cur(text, path);
  auto kv = parse_header(cur, "genseg-hmm");
  UnitHmm hmm;
  const auto label = kv.find("label");
  if (label == kv.end()) cur.fail_here("header is missing label=");
  hmm.label = label->second;
  const std::size_t s_count = header_count(cur, kv, "S");
  for (std::size_t j = 0; j < s_count; ++j) {
    const auto row = cur.expect_numbers(2, "transition row");
    hmm.self_prob.push_back(row[0]);
    hmm.next_prob.push_back(row[1]);
  }
  for (std::size_t j = 0; j < s_count; ++j) hmm.states.push_back(gmm_from_cursor(cur));
  hmm.validate();
  return hmm;
}

namespace {

bool filename_safe(const std::string& label) {
  if (label.empty() || label == "." || label == "..") return false;
  for (char c : label)
    if (c == '/' || c == '\\' || c == '\0' || std::isspace(static_cast<unsigned char>(c)))
      return false;
  return true;
}

}  // namespace

void save_hmmset(const UnitHmmSet& hmms, const std::string& dir) {
  require(!hmms.empty(), "save_hmmset: no unit models");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  for (const auto& [label, hmm] : hmms) {
    require(filename_safe(label), "save_hmmset: label '" + label + "' is not filename-safe");
    save_hmm(hmm, (std::filesystem::path(dir) / (label + ".hmm")).string());
  }
}

UnitHmmSet load_hmmset(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    fail(ErrorCode::io_failure, "'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".hmm")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "no .hmm files in '" + dir + "'");
  UnitHmmSet hmms;
  for (const auto& f : files) {
    UnitHmm hmm = load_hmm(f);
    const std::string label = hmm.label;
    require(hmms.emplace(label, std::move(hmm)).second,
            "duplicate unit label '" + label + "' in '" + dir + "'");
  }
  return hmms;
}

std::string sequence_model_to_text(const SequenceModel& model) {
  std::string out;
  if (model.kind == SequenceModelKind::path_grammar) {
    for (const auto& path : model.paths) {
      for (std::size_t i = 0; i < path.size(); ++i) out += (i ? " " : "") + path[i];
      out += '\n';
    }
    return out;
  }
  out = "bigram\n";
  const std::size_t v = model.vocabulary.size();
  auto name = [&](std::size_t i, bool row) {
    if (i < v) return model.vocabulary[i];
    return std::string(row ? "START" : "END");
  };
  for (std::size_t r = 0; r <= v; ++r)
    for (std::size_t c = 0; c <= v; ++c)
      out += name(r, true) + " " + name(c, false) + " " + fmt17(model.bigram_logp(r, c)) + "\n";
  return out;
}

SequenceModel sequence_model_from_text(const std::string& text) {
  TextCursor cur(text, "sequence model text");
  std::string line;
  std::vector<std::string> lines;
  while (cur.next_line(line)) {
    if (!line.empty()) lines.push_back(line);
  }
  require(!lines.empty(), "sequence model: empty file");

  if (lines.front() != "bigram") {
    std::vector<std::vector<std::string>> paths;
    for (const auto& l : lines) paths.push_back(split_tokens(l));
    return build_path_grammar(paths);
  }

  // bigram: collect vocabulary, then fill the table
  std::set<std::string> vocab;
  struct Triple { std::string prev, next; double logp; };
  std::vector<Triple> triples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto toks = split_tokens(lines[i]);
    if (toks.size() != 3)
      fail(ErrorCode::bad_format, "sequence model: malformed bigram line '" + lines[i] + "'");
    triples.push_back({toks[0], toks[1], std::strtod(toks[2].c_str(), nullptr)});
    if (toks[0] != "START") vocab.insert(toks[0]);
    if (toks[1] != "END") vocab.insert(toks[1]);
  }
  SequenceModel model;
  model.kind = SequenceModelKind::bigram;
  model.vocabulary.assign(vocab.begin(), vocab.end());
  const std::size_t v = model.vocabulary.size();
  model.bigram_logp = Matrix(v + 1, v + 1, -std::numeric_limits<double>::infinity());
  for (const auto& t : triples) {
    const std::size_t r =
        t.prev == "START" ? v : static_cast<std::size_t>(model.label_index(t.prev));
    const std::size_t c =
        t.next == "END" ? v : static_cast<std::size_t>(model.label_index(t.next));
    model.bigram_logp(r, c) = t.logp;
  }
  return model;
}

void save_sequence_model(const SequenceModel& model, const std::string& path) {
  write_text_file(path, sequence_model_to_text(model));
}

SequenceModel load_sequence_model(const std::string& path) {
  try {
    return sequence_model_from_text(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io_failure) throw;
    fail(ErrorCode::bad_format, path + ": " + e.what());
  }
}

std::string segmentation_to_text(const Segmentation& seg) {
  seg.validate();
  std::string out = "genseg-seg v1 T=" + std::to_string(seg.frames) +
                    " total=" + fmt17(seg.total_log_score) + "\n";
  for (const auto& s : seg.spans)
    out += s.label + " " + std::to_string(s.start) + " " + std::to_string(s.end) + " " +
           fmt17(s.log_score) + "\n";
  return out;
}

Segmentation segmentation_from_text(const std::string& text) {
  TextCursor cur(text, "segmentation text");
  Segmentation seg;
  std::string line;
  bool first = true;
  bool with_header = false;
  while (cur.next_line(line)) {
    if (line.empty()) continue;
    const auto toks = split_tokens(line);
    if (first && toks.size() >= 2 && toks[0] == "genseg-seg") {
      with_header = true;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        if (toks[i].rfind("total=", 0) == 0)
          seg.total_log_score = std::strtod(toks[i].c_str() + 6, nullptr);
        if (toks[i].rfind("T=", 0) == 0)
          seg.frames = static_cast<std::size_t>(std::stoull(toks[i].substr(2)));
      }
      first = false;
      continue;
    }
    first = false;
    if (toks.size() != 3 && toks.size() != 4)
      cur.fail_here("expected 'label start end [logscore]'");
    SegSpan span;
    span.label = toks[0];
    span.start = static_cast<std::size_t>(std::stoull(toks[1]));
    span.end = static_cast<std::size_t>(std::stoull(toks[2]));
    if (toks.size() == 4) span.log_score = std::strtod(toks[3].c_str(), nullptr);
    seg.spans.push_back(std::move(span));
  }
  require(!seg.spans.empty(), "segmentation: no spans");
  if (!with_header) {
    seg.frames = seg.spans.back().end;
    seg.total_log_score = 0.0;
  }
  seg.validate();
  return seg;
}

void save_segmentation(const Segmentation& seg, const std::string& path) {
  write_text_file(path, segmentation_to_text(seg));
}

std::string annotation_to_text(const Segmentation& seg) {
  seg.validate();
  std::string out;
  for (const auto& s : seg.spans)
    out += s.label + " " + std::to_string(s.start) + " " + std::to_string(s.end) + "\n";
  return out;
}

void save_annotation(const Segmentation& seg, const std::string& path) {
  write_text_file(path, annotation_to_text(seg));
}

Segmentation load_segmentation(const std::string& path) {
  try {
    return segmentation_from_text(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io_failure) throw;
    fail(ErrorCode::bad_format, path + ": " + e.what());
  }
}

}  // namespace genseg
