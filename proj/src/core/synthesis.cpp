#include "core/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "core/rng.hpp"

namespace genseg {

namespace {

std::size_t sample_duration(const UnitSpec& unit, Rng& rng) {
  double d = 0.0;
  switch (unit.duration) {
    case UnitSpec::Duration::fixed:
      d = unit.duration_a;
      break;
    case UnitSpec::Duration::uniform: {
      const auto lo = static_cast<std::uint64_t>(unit.duration_a);
      const auto hi = static_cast<std::uint64_t>(unit.duration_b);
      d = static_cast<double>(lo + rng.below(hi - lo + 1));
      break;
    }
    case UnitSpec::Duration::normal:
      d = std::round(rng.normal(unit.duration_a, unit.duration_b));
      break;
  }
  return std::max<std::size_t>(unit.states(),
                               d > 0.0 ? static_cast<std::size_t>(d) : 1);
}

void append_unit_frames(const UnitSpec& unit, std::size_t duration, Rng& rng,
                        std::vector<double>& frames) {
  const std::size_t s_count = unit.states();
  const std::size_t base = duration / s_count;
  const std::size_t rem = duration - base * s_count;
  for (std::size_t j = 0; j < s_count; ++j) {
    const std::size_t chunk = base + (j >= s_count - rem ? 1 : 0);
    for (std::size_t t = 0; t < chunk; ++t)
      for (std::size_t d = 0; d < unit.state_means.cols(); ++d)
        frames.push_back(rng.normal(unit.state_means(j, d),
                                    std::sqrt(unit.state_vars(j, d))));
  }
}

void generate_one(const DatasetSpec& spec, std::uint64_t sequence_index, Matrix& seq,
                  Segmentation& annotation) {
  Rng rng(mix_seed(spec.seed, sequence_index));
  const auto& path = spec.paths[rng.below(spec.paths.size())];
  std::vector<double> frames;
  annotation = {};
  std::size_t at = 0;
  for (const auto& label : path) {
    const UnitSpec& unit = *spec.find_unit(label);
    const std::size_t duration = sample_duration(unit, rng);
    append_unit_frames(unit, duration, rng, frames);
    annotation.spans.push_back({label, at, at + duration, 0.0});
    at += duration;
  }
  annotation.frames = at;
  seq = Matrix(at, spec.dim, std::move(frames));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

const UnitSpec* DatasetSpec::find_unit(const std::string& label) const {
  for (const auto& u : units)
    if (u.label == label) return &u;
  return nullptr;
}

void DatasetSpec::validate() const {
  std::vector<std::string> violations;
  if (dim < 1) violations.push_back("dim must be >= 1");
  if (train_sequences + test_sequences < 1)
    violations.push_back("no sequences requested");
  if (units.empty()) violations.push_back("no units defined");
  if (paths.empty()) violations.push_back("no paths defined");
  for (const auto& u : units) {
    if (u.label.empty()) violations.push_back("unit with empty label");
    if (u.states() < 1) violations.push_back("unit '" + u.label + "' has no states");
    if (u.state_means.cols() != dim || u.state_vars.rows() != u.states() ||
        u.state_vars.cols() != dim)
      violations.push_back("unit '" + u.label + "' parameter shapes disagree with dim");
    for (double v : u.state_vars.storage())
      if (!(v > 0.0)) {
        violations.push_back("unit '" + u.label + "' has non-positive variance");
        break;
      }
    if (u.duration != UnitSpec::Duration::normal &&
        u.duration_a < static_cast<double>(u.states()))
      violations.push_back("unit '" + u.label + "' duration below its state count");
    if (u.duration == UnitSpec::Duration::uniform && u.duration_b < u.duration_a)
      violations.push_back("unit '" + u.label + "' has an empty duration range");
  }
  for (const auto& path : paths) {
    if (path.empty()) violations.push_back("empty path");
    for (const auto& label : path)
      if (!find_unit(label))
        violations.push_back("path references undefined unit '" + label + "'");
  }
  if (!violations.empty()) {
    std::string msg = "invalid dataset spec:";
    for (const auto& v : violations) msg += "\n  - " + v;
    fail_invalid(msg);
  }
}

GeneratedDataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  GeneratedDataset out;
  out.train_sequences.resize(spec.train_sequences);
  out.train_annotations.resize(spec.train_sequences);
  out.test_sequences.resize(spec.test_sequences);
  out.test_annotations.resize(spec.test_sequences);
  for (std::size_t i = 0; i < spec.train_sequences; ++i)
    generate_one(spec, i, out.train_sequences[i], out.train_annotations[i]);
  for (std::size_t i = 0; i < spec.test_sequences; ++i)
    generate_one(spec, spec.train_sequences + i, out.test_sequences[i],
                 out.test_annotations[i]);
  return out;
}

DatasetSpec parse_dataset_spec(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  require(trim(line) == "genseg-dataspec v1",
          "dataset spec: missing 'genseg-dataspec v1' header");

  DatasetSpec spec;
  UnitSpec* unit = nullptr;
  bool in_paths = false;
  std::map<std::string, std::vector<std::pair<int, std::vector<double>>>> means, vars;
  std::map<std::string, double> scalar_var;

  auto parse_numbers = [](const std::string& s) {
    std::vector<double> out;
    std::istringstream ns(s);
    double v;
    while (ns >> v) out.push_back(v);
    return out;
  };

  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      require(t.back() == ']', "dataset spec: malformed section '" + t + "'");
      const std::string inner = trim(t.substr(1, t.size() - 2));
      if (inner == "paths") {
        in_paths = true;
        unit = nullptr;
        continue;
      }
      const auto toks = split_ws(inner);
      require(toks.size() == 2 && toks[0] == "unit",
              "dataset spec: unknown section '" + inner + "'");
      spec.units.emplace_back();
      unit = &spec.units.back();
      unit->label = toks[1];
      in_paths = false;
      continue;
    }
    if (in_paths) {
      spec.paths.push_back(split_ws(t));
      continue;
    }
    const auto eq = t.find('=');
    require(eq != std::string::npos, "dataset spec: expected key = value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (!unit) {
      if (key == "dim") spec.dim = std::stoul(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else if (key == "train_sequences") spec.train_sequences = std::stoul(val);
      else if (key == "test_sequences") spec.test_sequences = std::stoul(val);
      else fail_invalid("dataset spec: unknown key '" + key + "'");
      continue;
    }
    const auto ktoks = split_ws(key);
    if (key == "states") {
      // state count is implied by the mean rows; accepted for readability
    } else if (key == "duration") {
      const auto toks = split_ws(val);
      require(!toks.empty(), "dataset spec: empty duration");
      if (toks[0] == "fixed") {
        require(toks.size() == 2, "dataset spec: duration fixed <n>");
        unit->duration = UnitSpec::Duration::fixed;
        unit->duration_a = std::stod(toks[1]);
      } else if (toks[0] == "uniform") {
        require(toks.size() == 3, "dataset spec: duration uniform <lo> <hi>");
        unit->duration = UnitSpec::Duration::uniform;
        unit->duration_a = std::stod(toks[1]);
        unit->duration_b = std::stod(toks[2]);
      } else if (toks[0] == "normal") {
        require(toks.size() == 3, "dataset spec: duration normal <mean> <std>");
        unit->duration = UnitSpec::Duration::normal;
        unit->duration_a = std::stod(toks[1]);
        unit->duration_b = std::stod(toks[2]);
      } else {
        fail_invalid("dataset spec: unknown duration kind '" + toks[0] + "'");
      }
    } else if (ktoks.size() == 2 && ktoks[0] == "mean") {
      means[unit->label].emplace_back(std::stoi(ktoks[1]), parse_numbers(val));
    } else if (ktoks.size() == 2 && ktoks[0] == "var") {
      vars[unit->label].emplace_back(std::stoi(ktoks[1]), parse_numbers(val));
    } else if (key == "var") {
      scalar_var[unit->label] = std::stod(val);
    } else {
      fail_invalid("dataset spec: unknown unit key '" + key + "'");
    }
  }

  for (auto& u : spec.units) {
    auto& m = means[u.label];
    require(!m.empty(), "dataset spec: unit '" + u.label + "' has no state means");
    std::sort(m.begin(), m.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t s_count = m.size();
    const std::size_t dim = m.front().second.size();
    u.state_means = Matrix(s_count, dim);
    for (std::size_t j = 0; j < s_count; ++j) {
      require(m[j].first == static_cast<int>(j),
              "dataset spec: unit '" + u.label + "' mean indices must be 0..S-1");
      require(m[j].second.size() == dim,
              "dataset spec: unit '" + u.label + "' mean rows differ in length");
      std::copy(m[j].second.begin(), m[j].second.end(), u.state_means.row(j).data());
    }
    u.state_vars = Matrix(s_count, dim, 1.0);
    if (auto it = scalar_var.find(u.label); it != scalar_var.end())
      for (double& v : u.state_vars.storage()) v = it->second;
    auto& vv = vars[u.label];
    std::sort(vv.begin(), vv.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [j, row] : vv) {
      require(j >= 0 && static_cast<std::size_t>(j) < s_count && row.size() == dim,
              "dataset spec: unit '" + u.label + "' var row out of range");
      std::copy(row.begin(), row.end(), u.state_vars.row(static_cast<std::size_t>(j)).data());
    }
  }
  spec.validate();
  return spec;
}

std::string dataset_spec_to_text(const DatasetSpec& spec) {
  std::string out = "genseg-dataspec v1\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out += "dim = " + std::to_string(spec.dim) + "\n";
  out += "seed = " + std::to_string(spec.seed) + "\n";
  out += "train_sequences = " + std::to_string(spec.train_sequences) + "\n";
  out += "test_sequences = " + std::to_string(spec.test_sequences) + "\n";
  for (const auto& u : spec.units) {
    out += "\n[unit " + u.label + "]\n";
    out += "states = " + std::to_string(u.states()) + "\n";
    switch (u.duration) {
      case UnitSpec::Duration::fixed:
        out += "duration = fixed " + num(u.duration_a) + "\n";
        break;
      case UnitSpec::Duration::uniform:
        out += "duration = uniform " + num(u.duration_a) + " " + num(u.duration_b) + "\n";
        break;
      case UnitSpec::Duration::normal:
        out += "duration = normal " + num(u.duration_a) + " " + num(u.duration_b) + "\n";
        break;
    }
    for (std::size_t j = 0; j < u.states(); ++j) {
      out += "mean " + std::to_string(j) + " =";
      for (std::size_t d = 0; d < u.state_means.cols(); ++d)
        out += " " + num(u.state_means(j, d));
      out += "\n";
      out += "var " + std::to_string(j) + " =";
      for (std::size_t d = 0; d < u.state_vars.cols(); ++d)
        out += " " + num(u.state_vars(j, d));
      out += "\n";
    }
  }
  out += "\n[paths]\n";
  for (const auto& path : spec.paths) {
    for (std::size_t i = 0; i < path.size(); ++i)
      out += (i ? " " : "") + path[i];
    out += "\n";
  }
  return out;
}

DatasetSpec demo_dataset_spec() {
  DatasetSpec spec;
  spec.dim = 2;
  spec.seed = 7;
  spec.train_sequences = 60;
  spec.test_sequences = 20;
  const std::vector<std::string> labels = {"take", "crack", "pour", "stir", "serve"};
  for (std::size_t u = 0; u < labels.size(); ++u) {
    UnitSpec unit;
    unit.label = labels[u];
    unit.duration = UnitSpec::Duration::uniform;
    unit.duration_a = 20;
    unit.duration_b = 40;
    unit.state_means = Matrix(3, 2);
    unit.state_vars = Matrix(3, 2, 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      // unit-state grid with 4-sigma spacing at unit variance
      unit.state_means(j, 0) = 4.0 * static_cast<double>(u);
      unit.state_means(j, 1) = 4.0 * static_cast<double>(j);
    }
    spec.units.push_back(std::move(unit));
  }
  spec.paths = {
      {"take", "pour", "stir", "serve"},
      {"take", "crack", "stir", "serve"},
      {"take", "crack", "pour", "stir", "serve"},
      {"take", "pour", "crack", "serve"},
  };
  return spec;
}

}  // namespace genseg
