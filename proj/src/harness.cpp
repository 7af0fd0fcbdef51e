#include "hvtm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>

#include "hvtm/analytics.hpp"
#include "hvtm/errors.hpp"
#include "hvtm/explain.hpp"
#include "hvtm/rng.hpp"

namespace hvtm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// RunConfig serialization

ojson RunConfig::to_json() const {
  ojson j{{"data_kind", data_kind},
          {"train_images", train_images},
          {"train_labels", train_labels},
          {"test_images", test_images},
          {"test_labels", test_labels},
          {"train_path", train_path},
          {"test_path", test_path},
          {"label_map", label_map},
          {"fingerprint_length", fingerprint_length},
          {"train_per_class", train_per_class},
          {"test_per_class", test_per_class},
          {"train_fraction", train_fraction},
          {"test_fraction", test_fraction},
          {"encoder", encoder},
          {"hv_size", hv_size},
          {"nbits", nbits},
          {"patch_height", patch_height},
          {"patch_width", patch_width},
          {"stride", stride},
          {"binarize_threshold", binarize_threshold},
          {"clauses", clauses},
          {"threshold", threshold},
          {"specificity", specificity},
          {"states_per_action", states_per_action},
          {"epochs", epochs},
          {"ensembles", ensembles},
          {"seed", seed},
          {"out_dir", out_dir},
          {"hv_sizes", hv_sizes},
          {"nbits_list", nbits_list},
          {"clauses_list", clauses_list},
          {"model", model_path},
          {"top_k", top_k},
          {"tokens", tokens}};
  if (boost < 0)
    j["boost_true_positive"] = nullptr;
  else
    j["boost_true_positive"] = boost != 0;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "data_kind",      "train_images",   "train_labels",       "test_images",
      "test_labels",    "train_path",     "test_path",          "label_map",
      "fingerprint_length", "train_per_class", "test_per_class", "train_fraction",
      "test_fraction",  "encoder",        "hv_size",            "nbits",
      "patch_height",   "patch_width",    "stride",             "binarize_threshold",
      "clauses",        "threshold",      "specificity",        "states_per_action",
      "epochs",         "ensembles",      "seed",               "out_dir",
      "hv_sizes",       "nbits_list",     "clauses_list",       "model",
      "top_k",          "tokens",         "boost_true_positive"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config key: " + it.key());

  RunConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("data_kind", cfg.data_kind);
  get("train_images", cfg.train_images);
  get("train_labels", cfg.train_labels);
  get("test_images", cfg.test_images);
  get("test_labels", cfg.test_labels);
  get("train_path", cfg.train_path);
  get("test_path", cfg.test_path);
  get("label_map", cfg.label_map);
  get("fingerprint_length", cfg.fingerprint_length);
  get("train_per_class", cfg.train_per_class);
  get("test_per_class", cfg.test_per_class);
  get("train_fraction", cfg.train_fraction);
  get("test_fraction", cfg.test_fraction);
  get("encoder", cfg.encoder);
  get("hv_size", cfg.hv_size);
  get("nbits", cfg.nbits);
  get("patch_height", cfg.patch_height);
  get("patch_width", cfg.patch_width);
  get("stride", cfg.stride);
  get("binarize_threshold", cfg.binarize_threshold);
  get("clauses", cfg.clauses);
  get("threshold", cfg.threshold);
  get("specificity", cfg.specificity);
  get("states_per_action", cfg.states_per_action);
  get("epochs", cfg.epochs);
  get("ensembles", cfg.ensembles);
  get("seed", cfg.seed);
  get("out_dir", cfg.out_dir);
  get("hv_sizes", cfg.hv_sizes);
  get("nbits_list", cfg.nbits_list);
  get("clauses_list", cfg.clauses_list);
  get("model", cfg.model_path);
  get("top_k", cfg.top_k);
  get("tokens", cfg.tokens);
  if (j.contains("boost_true_positive") && !j.at("boost_true_positive").is_null())
    cfg.boost = j.at("boost_true_positive").get<bool>() ? 1 : 0;
  return cfg;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON config '" + path.string() + "': " + e.what());
  }
  // A run manifest embeds the config it ran with; accept it directly so a
  // manifest re-run is a one-liner.
  if (j.is_object() && j.contains("command") && j.contains("config"))
    return from_json(j.at("config"));
  return from_json(j);
}

uint64_t replica_seed(uint64_t master, uint32_t hv_size, uint32_t nbits, uint32_t clauses,
                      uint32_t ensemble) {
  uint64_t s = derive_seed(master, "hv", hv_size);
  s = derive_seed(s, "nbits", nbits);
  s = derive_seed(s, "clauses", clauses);
  return derive_seed(s, "ensemble", ensemble);
}

// ---------------------------------------------------------------------------
// Raw data loading (kind-erased), label unification, subsetting

namespace {

enum class DataKind { kXor, kIdx, kTsvText, kTsvFingerprint, kHvcache };

DataKind data_kind_from(const std::string& s) {
  if (s == "xor") return DataKind::kXor;
  if (s == "idx") return DataKind::kIdx;
  if (s == "tsv-text") return DataKind::kTsvText;
  if (s == "tsv-fingerprint") return DataKind::kTsvFingerprint;
  if (s == "hvcache") return DataKind::kHvcache;
  throw ConfigError(
      "data_kind must be one of: xor, idx, tsv-text, tsv-fingerprint, hvcache (got '" + s + "')");
}

std::string default_encoder_for(DataKind kind) {
  switch (kind) {
    case DataKind::kXor: return "vanilla";
    case DataKind::kIdx: return "image";
    case DataKind::kTsvText: return "text";
    case DataKind::kTsvFingerprint: return "fingerprint";
    case DataKind::kHvcache: return "vanilla";  // cache rows are already encoded
  }
  return "vanilla";
}

void check_encoder_compat(DataKind kind, const std::string& enc) {
  auto fail = [&](const char* allowed) {
    throw ConfigError("encoder '" + enc + "' cannot consume this data kind (allowed: " + allowed +
                      ")");
  };
  switch (kind) {
    case DataKind::kXor:
      if (enc != "vanilla") fail("vanilla");
      break;
    case DataKind::kIdx:
      if (enc != "image" && enc != "vanilla") fail("image, vanilla");
      break;
    case DataKind::kTsvText:
      if (enc != "text") fail("text");
      break;
    case DataKind::kTsvFingerprint:
      if (enc != "fingerprint" && enc != "vanilla") fail("fingerprint, vanilla");
      break;
    case DataKind::kHvcache:
      if (enc != "vanilla") fail("vanilla (cache rows are already encoded)");
      break;
  }
}

std::string resolved_encoder(const RunConfig& cfg, DataKind kind) {
  std::string enc = cfg.encoder.empty() ? default_encoder_for(kind) : cfg.encoder;
  check_encoder_compat(kind, enc);
  return enc;
}

struct RawSplit {
  std::vector<Image> images;                  // idx
  std::vector<std::string> texts;             // tsv-text
  std::vector<std::vector<uint32_t>> fps;     // tsv-fingerprint (set positions)
  std::vector<std::vector<uint8_t>> bits;     // xor rows
  std::vector<Hypervector> hvs;               // hvcache
  std::vector<uint32_t> labels;
  size_t size() const { return labels.size(); }
};

struct RawData {
  DataKind kind = DataKind::kXor;
  RawSplit train;
  RawSplit test;
  bool has_test = false;
  std::vector<std::string> class_names;
  uint32_t hvcache_size = 0;  // hv width for kHvcache
  ojson input_manifest;
};

void apply_subset(RawSplit& split, const std::vector<uint32_t>& keep) {
  auto filter = [&](auto& items) {
    if (items.empty()) return;
    std::decay_t<decltype(items)> out;
    out.reserve(keep.size());
    for (uint32_t i : keep) out.push_back(std::move(items[i]));
    items = std::move(out);
  };
  filter(split.images);
  filter(split.texts);
  filter(split.fps);
  filter(split.bits);
  filter(split.hvs);
  filter(split.labels);
}

// Remap split labels from per-file class names to the unified name list.
void remap_labels(RawSplit& split, const std::vector<std::string>& from,
                  const std::vector<std::string>& to) {
  std::vector<uint32_t> lut(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    auto it = std::lower_bound(to.begin(), to.end(), from[i]);
    lut[i] = uint32_t(it - to.begin());
  }
  for (auto& y : split.labels) y = lut[y];
}

std::vector<std::string> union_names(std::vector<std::string> a,
                                     const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

void report_rejected(const fs::path& path, const TsvLoadReport& report) {
  for (const auto& line : report.rejected)
    std::cerr << "warning: " << path.string() << ": " << line << " (line skipped)\n";
}

ojson file_entry(const std::string& path) {
  return ojson{{"path", path}, {"fnv1a64", file_fnv1a64_hex(path)}};
}

RawData load_raw(const RunConfig& cfg) {
  RawData raw;
  raw.kind = data_kind_from(cfg.data_kind);
  ojson files = ojson::object();

  switch (raw.kind) {
    case DataKind::kXor: {
      raw.train.bits = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
      raw.train.labels = {0, 1, 1, 0};
      raw.class_names = {"0", "1"};
      raw.has_test = false;
      break;
    }
    case DataKind::kIdx: {
      if (cfg.train_images.empty() || cfg.train_labels.empty())
        throw ConfigError("idx data needs train_images and train_labels");
      ImageDataset tr = load_idx(cfg.train_images, cfg.train_labels);
      files["train_images"] = file_entry(cfg.train_images);
      files["train_labels"] = file_entry(cfg.train_labels);
      raw.train.images = std::move(tr.images);
      raw.train.labels = std::move(tr.labels);
      uint32_t num_classes = uint32_t(tr.class_names.size());
      raw.has_test = !cfg.test_images.empty() || !cfg.test_labels.empty();
      if (raw.has_test) {
        if (cfg.test_images.empty() || cfg.test_labels.empty())
          throw ConfigError("idx test data needs both test_images and test_labels");
        ImageDataset te = load_idx(cfg.test_images, cfg.test_labels);
        files["test_images"] = file_entry(cfg.test_images);
        files["test_labels"] = file_entry(cfg.test_labels);
        raw.test.images = std::move(te.images);
        raw.test.labels = std::move(te.labels);
        num_classes = std::max(num_classes, uint32_t(te.class_names.size()));
      }
      for (uint32_t c = 0; c < num_classes; ++c) raw.class_names.push_back(std::to_string(c));
      break;
    }
    case DataKind::kTsvText: {
      if (cfg.train_path.empty()) throw ConfigError("tsv-text data needs train_path");
      TextDataset tr = load_tsv_text(cfg.train_path, cfg.label_map);
      report_rejected(cfg.train_path, tr.report);
      files["train_path"] = file_entry(cfg.train_path);
      raw.train.texts = std::move(tr.texts);
      raw.train.labels = std::move(tr.labels);
      raw.class_names = tr.class_names;
      raw.has_test = !cfg.test_path.empty();
      if (raw.has_test) {
        TextDataset te = load_tsv_text(cfg.test_path, cfg.label_map);
        report_rejected(cfg.test_path, te.report);
        files["test_path"] = file_entry(cfg.test_path);
        raw.test.texts = std::move(te.texts);
        raw.test.labels = std::move(te.labels);
        raw.class_names = union_names(tr.class_names, te.class_names);
        remap_labels(raw.train, tr.class_names, raw.class_names);
        remap_labels(raw.test, te.class_names, raw.class_names);
      }
      break;
    }
    case DataKind::kTsvFingerprint: {
      if (cfg.train_path.empty()) throw ConfigError("tsv-fingerprint data needs train_path");
      FingerprintDataset tr =
          load_tsv_fingerprint(cfg.train_path, cfg.fingerprint_length, cfg.label_map);
      report_rejected(cfg.train_path, tr.report);
      files["train_path"] = file_entry(cfg.train_path);
      raw.train.fps = std::move(tr.samples);
      raw.train.labels = std::move(tr.labels);
      raw.class_names = tr.class_names;
      raw.has_test = !cfg.test_path.empty();
      if (raw.has_test) {
        FingerprintDataset te =
            load_tsv_fingerprint(cfg.test_path, cfg.fingerprint_length, cfg.label_map);
        report_rejected(cfg.test_path, te.report);
        files["test_path"] = file_entry(cfg.test_path);
        raw.test.fps = std::move(te.samples);
        raw.test.labels = std::move(te.labels);
        raw.class_names = union_names(tr.class_names, te.class_names);
        remap_labels(raw.train, tr.class_names, raw.class_names);
        remap_labels(raw.test, te.class_names, raw.class_names);
      }
      break;
    }
    case DataKind::kHvcache: {
      if (cfg.train_path.empty()) throw ConfigError("hvcache data needs train_path");
      EncodedDataset tr = load_hvcache(cfg.train_path);
      files["train_path"] = file_entry(cfg.train_path);
      raw.train.hvs = std::move(tr.xs);
      raw.train.labels = std::move(tr.ys);
      raw.class_names = tr.class_names;
      raw.hvcache_size = tr.hv_size;
      raw.has_test = !cfg.test_path.empty();
      if (raw.has_test) {
        EncodedDataset te = load_hvcache(cfg.test_path);
        files["test_path"] = file_entry(cfg.test_path);
        if (te.hv_size != tr.hv_size)
          throw DataError("hvcache train/test hv_size mismatch");
        if (te.class_names != tr.class_names)
          throw DataError("hvcache train/test class names disagree");
        raw.test.hvs = std::move(te.xs);
        raw.test.labels = std::move(te.ys);
      }
      break;
    }
  }

  // Stratified subsetting, deterministic in (seed, class).
  if (cfg.train_per_class > 0 && cfg.train_fraction >= 0.0)
    throw ConfigError("set train_per_class or train_fraction, not both");
  if (cfg.test_per_class > 0 && cfg.test_fraction >= 0.0)
    throw ConfigError("set test_per_class or test_fraction, not both");

  ojson subset = ojson::object();
  auto subset_split = [&](RawSplit& split, uint32_t per_class, double fraction, const char* tag) {
    size_t total = split.size();
    std::vector<uint32_t> keep;
    if (per_class > 0)
      keep = stratified_indices_n(split.labels, per_class, derive_seed(cfg.seed, tag));
    else if (fraction >= 0.0)
      keep = stratified_indices_fraction(split.labels, fraction, derive_seed(cfg.seed, tag));
    else
      return;
    apply_subset(split, keep);
    subset[tag] = ojson{{"selected", split.size()}, {"of", total}};
  };
  subset_split(raw.train, cfg.train_per_class, cfg.train_fraction, "subset-train");
  if (raw.has_test) subset_split(raw.test, cfg.test_per_class, cfg.test_fraction, "subset-test");

  raw.input_manifest =
      ojson{{"data_kind", cfg.data_kind}, {"files", files}, {"subset", subset}};
  return raw;
}

SampleEncoder build_encoder(const RunConfig& cfg, DataKind kind, const std::string& enc,
                            uint32_t hv_size, uint32_t nbits) {
  uint64_t enc_seed = derive_seed(cfg.seed, "encoder");
  if (enc == "image") {
    ImageEncoderSpec spec;
    spec.hv_size = hv_size;
    spec.nbits = nbits;
    spec.patch_height = cfg.patch_height;
    spec.patch_width = cfg.patch_width;
    spec.stride = cfg.stride;
    spec.binarize_threshold = cfg.binarize_threshold;
    spec.seed = enc_seed;
    return SampleEncoder(ImageEncoder(spec));
  }
  if (enc == "text") {
    TextEncoderSpec spec;
    spec.hv_size = hv_size;
    spec.nbits = nbits;
    spec.seed = enc_seed;
    return SampleEncoder(TextEncoder(spec));
  }
  if (enc == "fingerprint") {
    FingerprintEncoderSpec spec;
    spec.hv_size = hv_size;
    spec.nbits = nbits;
    spec.fingerprint_length = cfg.fingerprint_length;
    spec.seed = enc_seed;
    return SampleEncoder(FingerprintEncoder(spec));
  }
  if (enc == "vanilla") return SampleEncoder();
  (void)kind;
  throw ConfigError("unknown encoder: " + enc);
}

EncodedDataset encode_split(const RunConfig& cfg, const RawData& raw, const RawSplit& split,
                            SampleEncoder& encoder, bool admit) {
  EncodedDataset out;
  out.class_names = raw.class_names;
  out.ys = split.labels;
  out.xs.reserve(split.size());

  switch (encoder.kind()) {
    case EncoderKind::kImage:
      for (const auto& img : split.images) out.xs.push_back(encoder.image().encode(img, admit));
      break;
    case EncoderKind::kText:
      for (const auto& text : split.texts) out.xs.push_back(encoder.text().encode(text, admit));
      break;
    case EncoderKind::kFingerprint:
      for (const auto& fp : split.fps) out.xs.push_back(encoder.fingerprint().encode(fp));
      break;
    case EncoderKind::kVanilla: {
      if (!split.hvs.empty() || raw.kind == DataKind::kHvcache) {
        out.xs = split.hvs;
        out.hv_size = raw.hvcache_size;
        return out;
      }
      if (raw.kind == DataKind::kIdx) {
        for (const auto& img : split.images) {
          std::vector<uint8_t> bits(img.pixels.size());
          for (size_t i = 0; i < img.pixels.size(); ++i)
            bits[i] = img.pixels[i] > cfg.binarize_threshold ? 1 : 0;
          out.xs.push_back(encode_vanilla(bits));
        }
      } else if (raw.kind == DataKind::kTsvFingerprint) {
        for (const auto& fp : split.fps) {
          std::vector<uint8_t> bits(cfg.fingerprint_length, 0);
          for (uint32_t p : fp) bits[p] = 1;
          out.xs.push_back(encode_vanilla(bits));
        }
      } else {
        for (const auto& row : split.bits) out.xs.push_back(encode_vanilla(row));
      }
      break;
    }
  }
  out.hv_size = out.xs.empty() ? 0 : out.xs.front().size();
  return out;
}

void require_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required for this command");
}

// Missing input paths are usage errors (exit 2) and must be caught before any
// output is created.
void check_input_paths(const RunConfig& cfg) {
  auto need = [](const std::string& path, const char* field) {
    if (!path.empty() && !fs::exists(path))
      throw ConfigError(std::string(field) + ": file not found: " + path);
  };
  need(cfg.train_images, "train_images");
  need(cfg.train_labels, "train_labels");
  need(cfg.test_images, "test_images");
  need(cfg.test_labels, "test_labels");
  need(cfg.train_path, "train_path");
  need(cfg.test_path, "test_path");
}

TMConfig make_tm_config(const RunConfig& cfg, uint32_t num_features, uint32_t clauses,
                        uint64_t seed) {
  TMConfig tmc;
  tmc.num_features = num_features;
  tmc.clauses_per_class = clauses;
  tmc.threshold = cfg.threshold;
  tmc.specificity = cfg.specificity;
  tmc.states_per_action = cfg.states_per_action;
  tmc.boost_true_positive = cfg.boost_resolved();
  tmc.seed = seed;
  tmc.validate();
  return tmc;
}

uint32_t banks_for(size_t num_classes) {
  if (num_classes < 2) throw ConfigError("training data must contain at least 2 classes");
  return num_classes == 2 ? 1 : uint32_t(num_classes);
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / double(xs.size());
}

void write_manifest(const fs::path& dir, const ojson& manifest) {
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PreparedData prepare_data(const RunConfig& cfg, uint32_t hv_size, uint32_t nbits) {
  RawData raw = load_raw(cfg);
  std::string enc_name = resolved_encoder(cfg, raw.kind);
  SampleEncoder encoder = build_encoder(cfg, raw.kind, enc_name, hv_size, nbits);

  PreparedData out{encode_split(cfg, raw, raw.train, encoder, /*admit=*/true),
                   EncodedDataset{},
                   SampleEncoder{},
                   std::move(raw.input_manifest)};
  out.test = raw.has_test ? encode_split(cfg, raw, raw.test, encoder, /*admit=*/false) : out.train;
  out.encoder = std::move(encoder);

  if (out.train.xs.empty()) throw DataError("training split is empty after loading/subsetting");
  if (out.test.xs.empty()) throw DataError("test split is empty after loading/subsetting");
  return out;
}

ReplicaResult run_replica(const PreparedData& data, const RunConfig& cfg, CellId cell,
                          uint32_t ensemble) {
  uint64_t seed = replica_seed(cfg.seed, cell.hv_size, cell.nbits, cell.clauses, ensemble);
  TMConfig tmc = make_tm_config(cfg, data.train.hv_size, cell.clauses, seed);
  TsetlinMachine tm(tmc, banks_for(data.train.class_names.size()));

  ReplicaResult result{{}, tm, 0.0, 0};
  for (uint32_t e = 1; e <= cfg.epochs; ++e) {
    tm.fit_epoch(data.train.xs, data.train.ys);
    Metrics m = tm.evaluate(data.test.xs, data.test.ys);
    result.records.push_back(
        {cell.hv_size, cell.nbits, cell.clauses, ensemble, e, m.accuracy, m.balanced_accuracy,
         seed});
    if (m.accuracy > result.best_accuracy) {
      result.best_accuracy = m.accuracy;
      result.best_epoch = e;
      result.best = tm;
    }
  }
  return result;
}

int run_train(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  require_out_dir(cfg);
  check_input_paths(cfg);
  if (cfg.ensembles == 0) throw ConfigError("ensembles must be at least 1");
  if (cfg.epochs == 0)
    std::cerr << "warning: epochs=0; models will be saved untrained and curves will be empty\n";

  PreparedData data = prepare_data(cfg, cfg.hv_size, cfg.nbits);
  CellId cell{data.encoder.kind() == EncoderKind::kVanilla ? data.train.hv_size : cfg.hv_size,
              data.encoder.kind() == EncoderKind::kVanilla ? 0 : cfg.nbits, cfg.clauses};

  fs::create_directories(cfg.out_dir);
  fs::path out(cfg.out_dir);

  std::vector<SweepRecord> records;
  std::vector<double> final_acc, best_acc;
  std::vector<std::string> outputs;
  int best_overall = -1;
  double best_overall_acc = -1.0;
  for (uint32_t k = 0; k < cfg.ensembles; ++k) {
    ReplicaResult r = run_replica(data, cfg, cell, k);
    records.insert(records.end(), r.records.begin(), r.records.end());
    if (!r.records.empty()) final_acc.push_back(r.records.back().accuracy);
    best_acc.push_back(r.best_accuracy);
    std::string name = "model_ens" + std::to_string(k) + ".json";
    save_model(out / name, r.best, data.encoder, data.train.class_names);
    outputs.push_back(name);
    if (r.best_accuracy > best_overall_acc) {
      best_overall_acc = r.best_accuracy;
      best_overall = int(k);
    }
  }
  write_sweep_long(records, out / "curves.csv");
  outputs.push_back("curves.csv");
  if (best_overall >= 0) {
    fs::copy_file(out / ("model_ens" + std::to_string(best_overall) + ".json"),
                  out / "model_best.json", fs::copy_options::overwrite_existing);
    outputs.push_back("model_best.json");
  }

  ojson manifest{{"command", "train"},
                 {"config", cfg.to_json()},
                 {"inputs", data.input_manifest},
                 {"class_names", data.train.class_names},
                 {"cell", ojson{{"hv_size", cell.hv_size}, {"nbits", cell.nbits},
                                {"clauses", cell.clauses}}},
                 {"outputs", outputs},
                 {"records", records.size()},
                 {"wall_seconds", seconds_since(t0)}};
  write_manifest(out, manifest);

  ojson summary{{"command", "train"},
                {"out_dir", cfg.out_dir},
                {"ensembles", cfg.ensembles},
                {"epochs", cfg.epochs},
                {"train_samples", data.train.xs.size()},
                {"test_samples", data.test.xs.size()},
                {"final_accuracy_mean", mean_of(final_acc)},
                {"best_accuracy_mean", mean_of(best_acc)}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_eval(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("eval needs --model");
  if (!fs::exists(cfg.model_path))
    throw ConfigError("model: file not found: " + cfg.model_path);
  check_input_paths(cfg);

  ModelBundle model = load_model(cfg.model_path);

  RawData raw = load_raw(cfg);
  // Evaluate the test split when one is configured, otherwise the train split.
  const RawSplit& split = raw.has_test ? raw.test : raw.train;

  // The dataset's classes must be known to the model; remap ids into the
  // model's label space.
  std::vector<uint32_t> lut(raw.class_names.size());
  for (size_t i = 0; i < raw.class_names.size(); ++i) {
    auto it = std::find(model.class_names.begin(), model.class_names.end(), raw.class_names[i]);
    if (it == model.class_names.end())
      throw DataError("dataset class '" + raw.class_names[i] + "' is unknown to the model");
    lut[i] = uint32_t(it - model.class_names.begin());
  }

  EncodedDataset ds = encode_split(cfg, raw, split, model.encoder, /*admit=*/false);
  for (auto& y : ds.ys) y = lut[y];
  if (ds.xs.empty()) throw ConfigError("evaluation dataset is empty");
  if (ds.hv_size != model.tm.config().num_features)
    throw ConfigError("dimension mismatch: model expects D=" +
                      std::to_string(model.tm.config().num_features) + ", dataset encodes to D=" +
                      std::to_string(ds.hv_size));

  Metrics m = model.tm.evaluate(ds.xs, ds.ys);
  ojson result{{"accuracy", m.accuracy},
               {"balanced_accuracy", m.balanced_accuracy},
               {"per_class_recall", m.per_class_recall},
               {"n_samples", m.n_samples},
               {"class_names", model.class_names},
               {"has_absent_class", m.has_absent_class},
               {"model", cfg.model_path},
               {"config", cfg.to_json()}};
  std::cout << result.dump(2) << "\n";

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    ojson manifest{{"command", "eval"}, {"config", cfg.to_json()},
                   {"inputs", raw.input_manifest}, {"result", result}};
    write_manifest(cfg.out_dir, manifest);
  }
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  require_out_dir(cfg);
  check_input_paths(cfg);
  if (cfg.ensembles == 0) throw ConfigError("ensembles must be at least 1");

  std::vector<uint32_t> hv_axis = cfg.hv_sizes.empty() ? std::vector<uint32_t>{cfg.hv_size}
                                                       : cfg.hv_sizes;
  std::vector<uint32_t> nb_axis = cfg.nbits_list.empty() ? std::vector<uint32_t>{cfg.nbits}
                                                         : cfg.nbits_list;
  std::vector<uint32_t> cl_axis = cfg.clauses_list.empty() ? std::vector<uint32_t>{cfg.clauses}
                                                           : cfg.clauses_list;

  DataKind kind = data_kind_from(cfg.data_kind);
  std::string enc_name = resolved_encoder(cfg, kind);
  if (enc_name == "vanilla" && (hv_axis.size() > 1 || nb_axis.size() > 1))
    throw ConfigError("vanilla encoding has no hv_size/nbits axes to sweep");

  fs::path out(cfg.out_dir);
  fs::create_directories(out / "cells");

  std::vector<SweepRecord> records;
  std::vector<std::string> resumed, computed;
  for (uint32_t hv : hv_axis) {
    for (uint32_t nb : nb_axis) {
      // Skip the (possibly expensive) encode when every clause cell for this
      // grid point is already on disk from an interrupted run.
      std::vector<uint32_t> missing;
      auto cell_file = [&](uint32_t cl) {
        return out / "cells" /
               ("cell_hv" + std::to_string(hv) + "_nb" + std::to_string(nb) + "_cl" +
                std::to_string(cl) + ".csv");
      };
      for (uint32_t cl : cl_axis)
        if (!fs::exists(cell_file(cl))) missing.push_back(cl);

      std::optional<PreparedData> data;
      if (!missing.empty()) data.emplace(prepare_data(cfg, hv, nb));

      for (uint32_t cl : cl_axis) {
        fs::path path = cell_file(cl);
        if (fs::exists(path)) {
          auto rows = read_sweep_long(path);
          records.insert(records.end(), rows.begin(), rows.end());
          resumed.push_back(path.filename().string());
          continue;
        }
        CellId cell{data->encoder.kind() == EncoderKind::kVanilla ? data->train.hv_size : hv,
                    data->encoder.kind() == EncoderKind::kVanilla ? 0u : nb, cl};
        std::vector<SweepRecord> cell_records;
        for (uint32_t k = 0; k < cfg.ensembles; ++k) {
          ReplicaResult r = run_replica(*data, cfg, cell, k);
          cell_records.insert(cell_records.end(), r.records.begin(), r.records.end());
        }
        write_sweep_long(cell_records, path);
        computed.push_back(path.filename().string());
        records.insert(records.end(), cell_records.begin(), cell_records.end());
      }
    }
  }

  write_sweep_long(records, out / "sweep_long.csv");
  write_sweep_summary(records, out / "sweep_summary.csv");

  ojson manifest{{"command", "sweep"},
                 {"config", cfg.to_json()},
                 {"axes", ojson{{"hv_sizes", hv_axis}, {"nbits", nb_axis}, {"clauses", cl_axis}}},
                 {"cells_computed", computed},
                 {"cells_resumed", resumed},
                 {"records", records.size()},
                 {"wall_seconds", seconds_since(t0)}};
  write_manifest(out, manifest);

  ojson summary{{"command", "sweep"},
                {"out_dir", cfg.out_dir},
                {"cells", hv_axis.size() * nb_axis.size() * cl_axis.size()},
                {"computed", computed.size()},
                {"resumed", resumed.size()},
                {"records", records.size()}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_explain(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("explain needs --model");
  if (!fs::exists(cfg.model_path))
    throw ConfigError("model: file not found: " + cfg.model_path);
  require_out_dir(cfg);

  ModelBundle model = load_model(cfg.model_path);
  std::vector<ClauseReport> reports = export_clauses(model.tm);

  std::vector<RoleView> roles = model.encoder.roles();
  if (cfg.top_k > 0 && !roles.empty()) {
    decode_clauses(std::span<ClauseReport>(reports), roles, model.tm.config().num_features,
                   roles.front().codebook->nbits());
    for (auto& r : reports)
      if (r.matches.size() > cfg.top_k) r.matches.resize(cfg.top_k);
  }

  fs::create_directories(cfg.out_dir);
  fs::path out(cfg.out_dir);
  std::string jsonl;
  for (const auto& r : reports) jsonl += clause_report_to_json(r).dump() + "\n";
  write_file_atomic(out / "clauses.jsonl", jsonl);

  NegatedLiteralStats stats = negated_literal_fraction(model.tm);
  ojson stats_json = negated_stats_to_json(stats);
  write_file_atomic(out / "explain_summary.json", stats_json.dump(2) + "\n");

  ojson manifest{{"command", "explain"},
                 {"config", cfg.to_json()},
                 {"model", cfg.model_path},
                 {"clauses", reports.size()},
                 {"outputs", {"clauses.jsonl", "explain_summary.json"}}};
  write_manifest(out, manifest);

  std::cout << stats_json.dump(2) << "\n";
  return 0;
}

int run_encode(const RunConfig& cfg) {
  require_out_dir(cfg);
  check_input_paths(cfg);
  if (data_kind_from(cfg.data_kind) == DataKind::kHvcache)
    throw ConfigError("hvcache input is already encoded");

  PreparedData data = prepare_data(cfg, cfg.hv_size, cfg.nbits);
  fs::create_directories(cfg.out_dir);
  fs::path out(cfg.out_dir);

  std::vector<std::string> outputs{"train.hvcache.json"};
  save_hvcache(out / "train.hvcache.json", data.train);
  bool test_configured = !cfg.test_images.empty() || !cfg.test_path.empty();
  if (test_configured) {
    save_hvcache(out / "test.hvcache.json", data.test);
    outputs.push_back("test.hvcache.json");
  }

  ojson manifest{{"command", "encode"},
                 {"config", cfg.to_json()},
                 {"inputs", data.input_manifest},
                 {"outputs", outputs}};
  write_manifest(out, manifest);

  ojson summary{{"command", "encode"},
                {"out_dir", cfg.out_dir},
                {"train_samples", data.train.xs.size()},
                {"test_samples", test_configured ? data.test.xs.size() : 0},
                {"hv_size", data.train.hv_size}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_info(const RunConfig& cfg) {
  if (cfg.hv_size == 0) throw ConfigError("info needs hv_size >= 1");
  if (cfg.nbits == 0 || cfg.nbits > cfg.hv_size)
    throw ConfigError("info needs nbits in [1, hv_size]");
  ojson result{{"hv_size", cfg.hv_size},
               {"nbits", cfg.nbits},
               {"tokens", cfg.tokens},
               {"capacity", capacity(cfg.hv_size, cfg.nbits)},
               {"overlap_likelihood", overlap_likelihood(cfg.hv_size, cfg.nbits, cfg.tokens)}};
  std::cout << result.dump(2) << "\n";
  return 0;
}

}  // namespace hvtm
