#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hvtm/data_io.hpp"
#include "hvtm/encoders.hpp"
#include "hvtm/tm.hpp"

#include "json.hpp"

namespace hvtm {

// Everything a run needs, loadable from one JSON config file with CLI flag
// overrides. The full config is echoed into every run manifest so a manifest
// re-run reproduces outputs bit-exactly (wall times live only in manifests,
// never in CSVs or model files).
struct RunConfig {
  // data source
  std::string data_kind;  // "xor" | "idx" | "tsv-text" | "tsv-fingerprint" | "hvcache"
  std::string train_images, train_labels;  // idx pair
  std::string test_images, test_labels;
  std::string train_path, test_path;  // tsv / hvcache
  std::map<std::string, std::string> label_map;
  uint32_t fingerprint_length = 4096;

  // stratified subsetting (0 / negative = take everything)
  uint32_t train_per_class = 0;
  uint32_t test_per_class = 0;
  double train_fraction = -1.0;
  double test_fraction = -1.0;

  // encoder ("" = default for the data kind)
  std::string encoder;
  uint32_t hv_size = 2048;
  uint32_t nbits = 4;
  uint32_t patch_height = 10;
  uint32_t patch_width = 10;
  uint32_t stride = 1;
  uint32_t binarize_threshold = 75;

  // learner
  uint32_t clauses = 100;
  int threshold = 15;
  double specificity = 3.0;
  int boost = -1;  // -1 unset (resolves to "on iff specificity == 1"), 0 off, 1 on
  uint32_t states_per_action = 127;

  // run shape
  uint32_t epochs = 30;
  uint32_t ensembles = 1;
  uint64_t seed = 42;
  std::string out_dir;

  // sweep axes (empty = singleton axis from the scalar field above)
  std::vector<uint32_t> hv_sizes;
  std::vector<uint32_t> nbits_list;
  std::vector<uint32_t> clauses_list;

  // eval / explain
  std::string model_path;
  uint32_t top_k = 5;

  // info
  uint64_t tokens = 1000;

  bool boost_resolved() const { return boost < 0 ? specificity == 1.0 : boost != 0; }

  nlohmann::ordered_json to_json() const;
  // Strict: unknown keys are config errors.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
};

// Replica seed chain shared by train and sweep, so a single-cell sweep is
// record-identical to a train run with the same parameters.
uint64_t replica_seed(uint64_t master, uint32_t hv_size, uint32_t nbits, uint32_t clauses,
                      uint32_t ensemble);

struct PreparedData {
  EncodedDataset train;
  EncodedDataset test;  // equals train when no test source is configured
  SampleEncoder encoder;
  nlohmann::ordered_json input_manifest;  // source hashes + subset bookkeeping
};

// Load, subset, encode. `hv_size`/`nbits` override the config's scalars so
// sweeps can reuse this per grid point.
PreparedData prepare_data(const RunConfig& cfg, uint32_t hv_size, uint32_t nbits);

// Column values identifying a run cell in curve records (vanilla runs report
// the raw feature width and nbits 0).
struct CellId {
  uint32_t hv_size = 0;
  uint32_t nbits = 0;
  uint32_t clauses = 0;
};

struct ReplicaResult {
  std::vector<SweepRecord> records;  // one per epoch
  TsetlinMachine best;               // best-accuracy epoch snapshot (untrained when epochs == 0)
  double best_accuracy = 0.0;
  uint32_t best_epoch = 0;
};

ReplicaResult run_replica(const PreparedData& data, const RunConfig& cfg, CellId cell,
                          uint32_t ensemble);

// Commands: return process exit code 0; config/data problems throw
// ConfigError/DataError which the CLI maps to exit codes 2/3.
int run_train(const RunConfig& cfg);
int run_eval(const RunConfig& cfg);
int run_sweep(const RunConfig& cfg);
int run_explain(const RunConfig& cfg);
int run_encode(const RunConfig& cfg);
int run_info(const RunConfig& cfg);

}  // namespace hvtm
