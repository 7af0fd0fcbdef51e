#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hvtm/encoders.hpp"
#include "hvtm/hypervector.hpp"
#include "hvtm/tm.hpp"

#include "json.hpp"

namespace hvtm {

// ---------------------------------------------------------------------------
// Raw datasets

struct ImageDataset {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<Image> images;
  std::vector<uint32_t> labels;
  std::vector<std::string> class_names;  // "0".. by label value
};

// IDX ubyte pair (big-endian, magic-checked). Image magic 0x00000803,
// label magic 0x00000801; sample counts must agree.
ImageDataset load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path);

// Malformed lines are collected (with line numbers) rather than aborting the load.
struct TsvLoadReport {
  std::vector<std::string> rejected;  // "line 12: missing TAB separator"
};

struct TextDataset {
  std::vector<std::string> texts;
  std::vector<uint32_t> labels;
  std::vector<std::string> class_names;  // sorted unique label strings
  TsvLoadReport report;
};

// One sample per line: label<TAB>utf-8 text. `label_map` renames raw labels
// before class ids are assigned (used e.g. to merge label variants).
TextDataset load_tsv_text(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& label_map = {});

struct FingerprintDataset {
  uint32_t fingerprint_length = 0;
  std::vector<std::vector<uint32_t>> samples;  // set bit positions, ascending
  std::vector<uint32_t> labels;
  std::vector<std::string> class_names;
  TsvLoadReport report;
};

// One sample per line: label<TAB>hex bit string covering exactly
// fingerprint_length bits (nibbles little-endian in bit order: hex char i,
// bit b within the nibble -> position 4*i + b).
FingerprintDataset load_tsv_fingerprint(const std::filesystem::path& path,
                                        uint32_t fingerprint_length,
                                        const std::map<std::string, std::string>& label_map = {});

// ---------------------------------------------------------------------------
// Deterministic stratified subsetting. Both return ascending sample indices,
// so a full-size subset preserves the original ordering exactly.

std::vector<uint32_t> stratified_indices_n(std::span<const uint32_t> labels, uint32_t n_per_class,
                                           uint64_t seed);
std::vector<uint32_t> stratified_indices_fraction(std::span<const uint32_t> labels,
                                                  double fraction, uint64_t seed);

// ---------------------------------------------------------------------------
// Encoded samples (the form the learner consumes)

struct EncodedDataset {
  uint32_t hv_size = 0;
  std::vector<Hypervector> xs;
  std::vector<uint32_t> ys;
  std::vector<std::string> class_names;
};

void save_hvcache(const std::filesystem::path& path, const EncodedDataset& ds);
EncodedDataset load_hvcache(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model persistence: versioned JSON carrying config, bank states, codebooks,
// and class names; checksummed so corruption is detected on load.

struct ModelBundle {
  TsetlinMachine tm;
  SampleEncoder encoder;
  std::vector<std::string> class_names;
};

void save_model(const std::filesystem::path& path, const TsetlinMachine& tm,
                const SampleEncoder& encoder, const std::vector<std::string>& class_names);
ModelBundle load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Sweep result tables

struct SweepRecord {
  uint32_t hv_size = 0;
  uint32_t nbits = 0;
  uint32_t clauses = 0;
  uint32_t ensemble = 0;
  uint32_t epoch = 0;  // 1-based
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  uint64_t seed = 0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1); 0 when n < 2
};

MeanSd mean_sample_sd(std::span<const double> xs);

// Fixed 6-significant-digit float formatting keeps CSV bytes stable across runs.
std::string format_g6(double x);

// Long format: hv_size,nbits,clauses,ensemble,epoch,accuracy,balanced_accuracy,seed.
void write_sweep_long(const std::vector<SweepRecord>& records,
                      const std::filesystem::path& path);

// Inverse of write_sweep_long (used to resume interrupted sweeps).
std::vector<SweepRecord> read_sweep_long(const std::filesystem::path& path);

// Per (hv_size,nbits,clauses) cell: mean +/- sample sd over ensembles of the
// max-over-epochs metric.
void write_sweep_summary(const std::vector<SweepRecord>& records,
                         const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// File helpers

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file then renames, so partial writes never land.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string file_fnv1a64_hex(const std::filesystem::path& path);
std::string u64_hex(uint64_t value);  // 16 lowercase hex digits

}  // namespace hvtm
