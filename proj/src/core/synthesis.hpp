#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/decoder.hpp"
#include "core/matrix.hpp"

namespace genseg {

// Ground-truth generator description: per-unit left-to-right state
// emissions plus a finite set of allowed unit orderings sampled uniformly.
struct UnitSpec {
  enum class Duration { fixed, uniform, normal };

  std::string label;
  Matrix state_means;  // S x D
  Matrix state_vars;   // S x D
  Duration duration = Duration::fixed;
  double duration_a = 0.0;  // fixed value / uniform low / normal mean
  double duration_b = 0.0;  // uniform high / normal stddev

  std::size_t states() const { return state_means.rows(); }
};

struct DatasetSpec {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::size_t train_sequences = 0;
  std::size_t test_sequences = 0;
  std::vector<UnitSpec> units;
  std::vector<std::vector<std::string>> paths;

  // Throws an invalid-input error listing every violation.
  void validate() const;
  const UnitSpec* find_unit(const std::string& label) const;
};

struct GeneratedDataset {
  std::vector<Matrix> train_sequences;
  std::vector<Segmentation> train_annotations;
  std::vector<Matrix> test_sequences;
  std::vector<Segmentation> test_annotations;
};

// Sequences are generated independently from per-sequence seeds derived
// from (spec.seed, index), so output is stable under any batching.
GeneratedDataset generate_dataset(const DatasetSpec& spec);

DatasetSpec parse_dataset_spec(const std::string& text);
std::string dataset_spec_to_text(const DatasetSpec& spec);

// Built-in five-unit demo generator with well-separated emissions.
DatasetSpec demo_dataset_spec();

}  // namespace genseg
