#pragma once

#include <string>

#include "core/decoder.hpp"
#include "core/gmm.hpp"
#include "core/hmm.hpp"
#include "core/matrix.hpp"
#include "core/pca.hpp"
#include "core/sequence_model.hpp"

namespace genseg {

// Binary frame-sequence format: magic "GSEQ1", little-endian u32 frame
// count and dimension, then float32 row-major frames.
Matrix load_sequence(const std::string& path);
void save_sequence(const Matrix& seq, const std::string& path);

// Comma- or whitespace-separated numeric rows, one frame per line.
Matrix load_sequence_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Plain-text model formats. Floats are written with 17 significant digits
// so every file round-trips to the identical in-memory model.
std::string gmm_to_text(const DiagonalGmm& gmm);
DiagonalGmm gmm_from_text(const std::string& text);
void save_gmm(const DiagonalGmm& gmm, const std::string& path);
DiagonalGmm load_gmm(const std::string& path);

std::string pca_to_text(const PcaModel& pca);
PcaModel pca_from_text(const std::string& text);
void save_pca(const PcaModel& pca, const std::string& path);
PcaModel load_pca(const std::string& path);

std::string hmm_to_text(const UnitHmm& hmm);
UnitHmm hmm_from_text(const std::string& text);
void save_hmm(const UnitHmm& hmm, const std::string& path);
UnitHmm load_hmm(const std::string& path);

// One <label>.hmm file per unit inside `dir`.
void save_hmmset(const UnitHmmSet& hmms, const std::string& dir);
UnitHmmSet load_hmmset(const std::string& dir);

std::string sequence_model_to_text(const SequenceModel& model);
SequenceModel sequence_model_from_text(const std::string& text);
void save_sequence_model(const SequenceModel& model, const std::string& path);
SequenceModel load_sequence_model(const std::string& path);

// Decoder output: "genseg-seg v1" header plus one span per line. The
// loader also accepts header-less annotation files ("label start end"),
// scoring every span 0.
std::string segmentation_to_text(const Segmentation& seg);
Segmentation segmentation_from_text(const std::string& text);
void save_segmentation(const Segmentation& seg, const std::string& path);
Segmentation load_segmentation(const std::string& path);

// Ground-truth annotation format: "label start end" per line, half-open
// frame spans, sorted, no header.
std::string annotation_to_text(const Segmentation& seg);
void save_annotation(const Segmentation& seg, const std::string& path);

}  // namespace genseg
