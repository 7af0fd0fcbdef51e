#include "hvtm/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <tuple>

#include "hvtm/errors.hpp"
#include "hvtm/rng.hpp"

namespace hvtm {

// ---------------------------------------------------------------------------
// File helpers

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("error reading file: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw DataError("error writing file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string u64_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_fnv1a64_hex(const std::filesystem::path& path) {
  return u64_hex(fnv1a64(read_file(path)));
}

// ---------------------------------------------------------------------------
// IDX loading

namespace {

uint32_t be32_at(const std::string& bytes, size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size())
    throw DataError("truncated IDX file '" + path.string() + "': need 4 bytes at offset " +
                    std::to_string(offset));
  auto b = [&](size_t i) { return uint32_t(uint8_t(bytes[offset + i])); };
  return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

constexpr uint32_t kIdxImageMagic = 0x00000803;
constexpr uint32_t kIdxLabelMagic = 0x00000801;

void check_magic(uint32_t magic, uint32_t expected, uint32_t other,
                 const std::filesystem::path& path, const char* kind) {
  if (magic == expected) return;
  std::string msg = "bad IDX magic 0x" + u64_hex(magic).substr(8) + " in '" + path.string() +
                    "' (expected " + kind + ")";
  if (magic == other) msg += "; image/label paths swapped?";
  throw DataError(msg);
}

}  // namespace

ImageDataset load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path) {
  std::string img_bytes = read_file(images_path);
  std::string lbl_bytes = read_file(labels_path);

  check_magic(be32_at(img_bytes, 0, images_path), kIdxImageMagic, kIdxLabelMagic, images_path,
              "images, magic 0x00000803");
  uint32_t n_images = be32_at(img_bytes, 4, images_path);
  uint32_t rows = be32_at(img_bytes, 8, images_path);
  uint32_t cols = be32_at(img_bytes, 12, images_path);
  uint64_t need = 16ull + uint64_t(n_images) * rows * cols;
  if (img_bytes.size() < need)
    throw DataError("truncated IDX file '" + images_path.string() + "': need " +
                    std::to_string(need) + " bytes, have " + std::to_string(img_bytes.size()));

  check_magic(be32_at(lbl_bytes, 0, labels_path), kIdxLabelMagic, kIdxImageMagic, labels_path,
              "labels, magic 0x00000801");
  uint32_t n_labels = be32_at(lbl_bytes, 4, labels_path);
  if (lbl_bytes.size() < 8ull + n_labels)
    throw DataError("truncated IDX file '" + labels_path.string() + "': need " +
                    std::to_string(8ull + n_labels) + " bytes, have " +
                    std::to_string(lbl_bytes.size()));

  if (n_images != n_labels)
    throw DataError("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
                    std::to_string(n_labels) + " labels");

  ImageDataset ds;
  ds.height = rows;
  ds.width = cols;
  ds.images.reserve(n_images);
  ds.labels.reserve(n_images);
  uint32_t max_label = 0;
  size_t stride = size_t(rows) * cols;
  for (uint32_t i = 0; i < n_images; ++i) {
    Image img;
    img.height = rows;
    img.width = cols;
    const auto* base = reinterpret_cast<const uint8_t*>(img_bytes.data()) + 16 + i * stride;
    img.pixels.assign(base, base + stride);
    ds.images.push_back(std::move(img));
    uint32_t label = uint8_t(lbl_bytes[8 + i]);
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  for (uint32_t c = 0; c <= max_label; ++c) ds.class_names.push_back(std::to_string(c));
  return ds;
}

// ---------------------------------------------------------------------------
// TSV loading

namespace {

struct TsvRow {
  size_t line_no = 0;
  std::string label;
  std::string value;
};

// Splits into rows, collecting malformed lines into the report. Blank lines
// are skipped silently (files often end with one).
std::vector<TsvRow> parse_tsv(const std::string& bytes, TsvLoadReport& report) {
  std::vector<TsvRow> rows;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < bytes.size()) {
    size_t eol = bytes.find('\n', pos);
    std::string line = bytes.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? bytes.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      report.rejected.push_back("line " + std::to_string(line_no) + ": missing TAB separator");
      continue;
    }
    if (tab == 0) {
      report.rejected.push_back("line " + std::to_string(line_no) + ": empty label");
      continue;
    }
    rows.push_back({line_no, line.substr(0, tab), line.substr(tab + 1)});
  }
  return rows;
}

std::string apply_label_map(const std::string& label,
                            const std::map<std::string, std::string>& label_map) {
  auto it = label_map.find(label);
  return it == label_map.end() ? label : it->second;
}

// Sorted unique label strings -> dense class ids.
std::vector<uint32_t> assign_class_ids(const std::vector<std::string>& raw_labels,
                                       std::vector<std::string>& class_names) {
  class_names = raw_labels;
  std::sort(class_names.begin(), class_names.end());
  class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());
  std::vector<uint32_t> ids;
  ids.reserve(raw_labels.size());
  for (const auto& label : raw_labels) {
    auto it = std::lower_bound(class_names.begin(), class_names.end(), label);
    ids.push_back(uint32_t(it - class_names.begin()));
  }
  return ids;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

TextDataset load_tsv_text(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& label_map) {
  TextDataset ds;
  std::vector<std::string> raw_labels;
  for (auto& row : parse_tsv(read_file(path), ds.report)) {
    raw_labels.push_back(apply_label_map(row.label, label_map));
    ds.texts.push_back(std::move(row.value));
  }
  ds.labels = assign_class_ids(raw_labels, ds.class_names);
  return ds;
}

FingerprintDataset load_tsv_fingerprint(const std::filesystem::path& path,
                                        uint32_t fingerprint_length,
                                        const std::map<std::string, std::string>& label_map) {
  if (fingerprint_length == 0)
    throw ConfigError("load_tsv_fingerprint: fingerprint_length must be positive");
  FingerprintDataset ds;
  ds.fingerprint_length = fingerprint_length;
  size_t expected_hex = (fingerprint_length + 3) / 4;

  std::vector<std::string> raw_labels;
  for (const auto& row : parse_tsv(read_file(path), ds.report)) {
    const std::string& hex = row.value;
    if (hex.size() != expected_hex) {
      ds.report.rejected.push_back("line " + std::to_string(row.line_no) +
                                   ": fingerprint hex length " + std::to_string(hex.size()) +
                                   ", expected " + std::to_string(expected_hex));
      continue;
    }
    std::vector<uint32_t> positions;
    bool ok = true;
    for (size_t i = 0; i < hex.size() && ok; ++i) {
      int v = hex_value(hex[i]);
      if (v < 0) {
        ds.report.rejected.push_back("line " + std::to_string(row.line_no) +
                                     ": invalid hex character '" + hex[i] + "'");
        ok = false;
        break;
      }
      for (uint32_t b = 0; b < 4; ++b)
        if (v & (1 << b)) {
          uint32_t p = uint32_t(4 * i + b);
          if (p >= fingerprint_length) {
            ds.report.rejected.push_back("line " + std::to_string(row.line_no) +
                                         ": bit set beyond fingerprint length");
            ok = false;
            break;
          }
          positions.push_back(p);
        }
    }
    if (!ok) continue;
    raw_labels.push_back(apply_label_map(row.label, label_map));
    ds.samples.push_back(std::move(positions));
  }
  ds.labels = assign_class_ids(raw_labels, ds.class_names);
  return ds;
}

// ---------------------------------------------------------------------------
// Stratified subsetting

namespace {

std::vector<uint32_t> stratified_take(std::span<const uint32_t> labels,
                                      const std::function<size_t(uint32_t cls, size_t size)>& want,
                                      uint64_t seed) {
  uint32_t num_classes = 0;
  for (uint32_t y : labels) num_classes = std::max(num_classes, y + 1);
  std::vector<std::vector<uint32_t>> by_class(num_classes);
  for (uint32_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<uint32_t> picked;
  for (uint32_t c = 0; c < num_classes; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    size_t k = want(c, idx.size());
    Prng rng(derive_seed(seed, "subset", c));
    rng.shuffle(std::span<uint32_t>(idx));
    idx.resize(std::min(k, idx.size()));
    picked.insert(picked.end(), idx.begin(), idx.end());
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

std::vector<uint32_t> stratified_indices_n(std::span<const uint32_t> labels, uint32_t n_per_class,
                                           uint64_t seed) {
  return stratified_take(
      labels,
      [&](uint32_t cls, size_t size) {
        if (n_per_class > size)
          std::cerr << "warning: class " << cls << " has only " << size << " samples (asked for "
                    << n_per_class << "); taking all\n";
        return std::min<size_t>(n_per_class, size);
      },
      seed);
}

std::vector<uint32_t> stratified_indices_fraction(std::span<const uint32_t> labels,
                                                  double fraction, uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ConfigError("subset fraction must be in [0, 1]");
  return stratified_take(
      labels,
      [&](uint32_t, size_t size) {
        return std::min<size_t>(size, size_t(std::llround(fraction * double(size))));
      },
      seed);
}

// ---------------------------------------------------------------------------
// Encoded-sample cache

namespace {

uint64_t parse_word_hex(const std::string& s) {
  if (s.size() != 16) throw DataError("hvcache: malformed word (expected 16 hex digits)");
  uint64_t w = 0;
  for (char c : s) {
    int v = hex_value(c);
    if (v < 0) throw DataError("hvcache: malformed word (invalid hex digit)");
    w = (w << 4) | uint64_t(v);
  }
  return w;
}

Hypervector hv_from_words(uint32_t size, const std::vector<uint64_t>& words) {
  if (words.size() != Hypervector::words_for(size))
    throw DataError("hvcache: word count disagrees with hv_size");
  Hypervector hv(size);
  for (size_t wi = 0; wi < words.size(); ++wi) {
    uint64_t w = words[wi];
    while (w) {
      uint32_t bit = uint32_t(std::countr_zero(w));
      uint32_t p = uint32_t(wi * 64 + bit);
      if (p >= size) throw DataError("hvcache: bit set beyond hv_size");
      hv.set(p);
      w &= w - 1;
    }
  }
  return hv;
}

nlohmann::ordered_json parse_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace

void save_hvcache(const std::filesystem::path& path, const EncodedDataset& ds) {
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const auto& hv : ds.xs) {
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (uint64_t w : hv.words()) words.push_back(u64_hex(w));
    samples.push_back(std::move(words));
  }
  nlohmann::ordered_json j{{"format", "hvtm-hvcache"},
                           {"version", 1},
                           {"hv_size", ds.hv_size},
                           {"class_names", ds.class_names},
                           {"labels", ds.ys},
                           {"samples", samples}};
  write_file_atomic(path, j.dump(2) + "\n");
}

EncodedDataset load_hvcache(const std::filesystem::path& path) {
  nlohmann::ordered_json j = parse_json_file(path);
  if (j.value("format", "") != "hvtm-hvcache")
    throw DataError("not an hvcache file: " + path.string());
  int version = j.value("version", 0);
  if (version != 1)
    throw DataError("unsupported hvcache version " + std::to_string(version) + " (supported: 1)");
  EncodedDataset ds;
  ds.hv_size = j.at("hv_size").get<uint32_t>();
  ds.class_names = j.at("class_names").get<std::vector<std::string>>();
  ds.ys = j.at("labels").get<std::vector<uint32_t>>();
  for (const auto& sample : j.at("samples")) {
    std::vector<uint64_t> words;
    for (const auto& w : sample) words.push_back(parse_word_hex(w.get<std::string>()));
    ds.xs.push_back(hv_from_words(ds.hv_size, words));
  }
  if (ds.xs.size() != ds.ys.size())
    throw DataError("hvcache: sample/label count mismatch in " + path.string());
  return ds;
}

// ---------------------------------------------------------------------------
// Model persistence

namespace {

constexpr int kModelVersion = 1;

std::string states_to_hex(std::span<const uint8_t> states) {
  static const char* hex = "0123456789abcdef";
  std::string out(states.size() * 2, '0');
  for (size_t i = 0; i < states.size(); ++i) {
    out[2 * i] = hex[states[i] >> 4];
    out[2 * i + 1] = hex[states[i] & 0xf];
  }
  return out;
}

std::vector<uint8_t> hex_to_states(const std::string& hex) {
  if (hex.size() % 2 != 0) throw DataError("model: malformed bank state string");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DataError("model: malformed bank state string");
    out[i] = uint8_t((hi << 4) | lo);
  }
  return out;
}

nlohmann::ordered_json config_to_json(const TMConfig& cfg) {
  return nlohmann::ordered_json{{"num_features", cfg.num_features},
                                {"clauses_per_class", cfg.clauses_per_class},
                                {"threshold", cfg.threshold},
                                {"specificity", cfg.specificity},
                                {"states_per_action", cfg.states_per_action},
                                {"boost_true_positive", cfg.boost_true_positive},
                                {"seed", cfg.seed}};
}

TMConfig config_from_json(const nlohmann::json& j) {
  TMConfig cfg;
  cfg.num_features = j.at("num_features").get<uint32_t>();
  cfg.clauses_per_class = j.at("clauses_per_class").get<uint32_t>();
  cfg.threshold = j.at("threshold").get<int>();
  cfg.specificity = j.at("specificity").get<double>();
  cfg.states_per_action = j.at("states_per_action").get<uint32_t>();
  cfg.boost_true_positive = j.at("boost_true_positive").get<bool>();
  cfg.seed = j.at("seed").get<uint64_t>();
  return cfg;
}

}  // namespace

void save_model(const std::filesystem::path& path, const TsetlinMachine& tm,
                const SampleEncoder& encoder, const std::vector<std::string>& class_names) {
  if (class_names.size() != tm.label_space())
    throw ConfigError("save_model: class name count disagrees with the machine's label space");
  nlohmann::ordered_json banks = nlohmann::ordered_json::array();
  for (uint32_t c = 0; c < tm.num_banks(); ++c) banks.push_back(states_to_hex(tm.bank(c).states()));
  nlohmann::ordered_json payload{{"config", config_to_json(tm.config())},
                                 {"num_banks", tm.num_banks()},
                                 {"epochs_trained", tm.epochs_trained()},
                                 {"class_names", class_names},
                                 {"encoder", encoder.to_json()},
                                 {"banks", banks}};
  nlohmann::ordered_json j{{"format", "hvtm-model"},
                           {"version", kModelVersion},
                           {"checksum", u64_hex(fnv1a64(payload.dump()))},
                           {"payload", payload}};
  write_file_atomic(path, j.dump(2) + "\n");
}

ModelBundle load_model(const std::filesystem::path& path) {
  nlohmann::ordered_json j = parse_json_file(path);
  if (j.value("format", "") != "hvtm-model")
    throw DataError("not a model file: " + path.string());
  int version = j.value("version", 0);
  if (version != kModelVersion)
    throw DataError("unsupported model version " + std::to_string(version) + " (supported: " +
                    std::to_string(kModelVersion) + ")");
  if (!j.contains("payload") || !j.contains("checksum"))
    throw DataError("model file missing payload or checksum: " + path.string());
  const auto& payload = j.at("payload");
  if (u64_hex(fnv1a64(payload.dump())) != j.at("checksum").get<std::string>())
    throw DataError("model file checksum mismatch (corrupted file?): " + path.string());

  TMConfig cfg = config_from_json(payload.at("config"));
  cfg.validate();
  uint32_t num_banks = payload.at("num_banks").get<uint32_t>();
  TsetlinMachine tm(cfg, num_banks);

  const auto& banks = payload.at("banks");
  if (banks.size() != num_banks) throw DataError("model: bank count disagrees with num_banks");
  for (uint32_t c = 0; c < num_banks; ++c)
    tm.bank(c).restore_states(hex_to_states(banks[c].get<std::string>()));
  tm.set_epochs_trained(payload.at("epochs_trained").get<uint64_t>());

  ModelBundle bundle{std::move(tm), SampleEncoder::from_json(payload.at("encoder")),
                     payload.at("class_names").get<std::vector<std::string>>()};
  if (bundle.class_names.size() != bundle.tm.label_space())
    throw DataError("model: class name count disagrees with label space");
  return bundle;
}

// ---------------------------------------------------------------------------
// Sweep tables

MeanSd mean_sample_sd(std::span<const double> xs) {
  MeanSd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / double(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / double(xs.size() - 1));
  return out;
}

std::string format_g6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

void write_sweep_long(const std::vector<SweepRecord>& records,
                      const std::filesystem::path& path) {
  std::string out = "hv_size,nbits,clauses,ensemble,epoch,accuracy,balanced_accuracy,seed\n";
  for (const auto& r : records) {
    out += std::to_string(r.hv_size) + ',' + std::to_string(r.nbits) + ',' +
           std::to_string(r.clauses) + ',' + std::to_string(r.ensemble) + ',' +
           std::to_string(r.epoch) + ',' + format_g6(r.accuracy) + ',' +
           format_g6(r.balanced_accuracy) + ',' + std::to_string(r.seed) + '\n';
  }
  write_file_atomic(path, out);
}

std::vector<SweepRecord> read_sweep_long(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  std::vector<SweepRecord> records;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < bytes.size()) {
    size_t eol = bytes.find('\n', pos);
    std::string line = bytes.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? bytes.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "hv_size,nbits,clauses,ensemble,epoch,accuracy,balanced_accuracy,seed")
        throw DataError("unexpected sweep CSV header in " + path.string());
      continue;
    }
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 8)
      throw DataError("malformed sweep CSV row at line " + std::to_string(line_no) + " in " +
                      path.string());
    try {
      SweepRecord r;
      r.hv_size = uint32_t(std::stoul(fields[0]));
      r.nbits = uint32_t(std::stoul(fields[1]));
      r.clauses = uint32_t(std::stoul(fields[2]));
      r.ensemble = uint32_t(std::stoul(fields[3]));
      r.epoch = uint32_t(std::stoul(fields[4]));
      r.accuracy = std::stod(fields[5]);
      r.balanced_accuracy = std::stod(fields[6]);
      r.seed = std::stoull(fields[7]);
      records.push_back(r);
    } catch (const std::exception&) {
      throw DataError("malformed sweep CSV row at line " + std::to_string(line_no) + " in " +
                      path.string());
    }
  }
  return records;
}

void write_sweep_summary(const std::vector<SweepRecord>& records,
                         const std::filesystem::path& path) {
  // cell -> ensemble -> max-over-epochs (accuracy, balanced accuracy)
  std::map<std::tuple<uint32_t, uint32_t, uint32_t>, std::map<uint32_t, std::pair<double, double>>>
      cells;
  for (const auto& r : records) {
    auto& best = cells[{r.hv_size, r.nbits, r.clauses}][r.ensemble];
    best.first = std::max(best.first, r.accuracy);
    best.second = std::max(best.second, r.balanced_accuracy);
  }
  std::string out =
      "hv_size,nbits,clauses,ensembles,mean_accuracy,sd_accuracy,mean_balanced_accuracy,sd_"
      "balanced_accuracy\n";
  for (const auto& [key, ensembles] : cells) {
    std::vector<double> acc, bal;
    for (const auto& [ens, best] : ensembles) {
      acc.push_back(best.first);
      bal.push_back(best.second);
    }
    MeanSd a = mean_sample_sd(acc);
    MeanSd b = mean_sample_sd(bal);
    out += std::to_string(std::get<0>(key)) + ',' + std::to_string(std::get<1>(key)) + ',' +
           std::to_string(std::get<2>(key)) + ',' + std::to_string(ensembles.size()) + ',' +
           format_g6(a.mean) + ',' + format_g6(a.sd) + ',' + format_g6(b.mean) + ',' +
           format_g6(b.sd) + '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace hvtm
