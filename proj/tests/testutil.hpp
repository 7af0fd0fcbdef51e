#pragma once

// Shared helpers for the test binaries: temp directories, subprocess capture,
// IDX fixture writers, and environment-provided paths (set by ctest).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline std::string repo_dir() {
  const char* env = std::getenv("HVTM_REPO_DIR");
  return env ? env : ".";
}

inline std::string cli_path() {
  const char* env = std::getenv("HVTM_CLI_PATH");
  return env ? env : "./build/hvtm";
}

// Unique scratch directory, removed (recursively) on scope exit.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto candidate = base / ("hvtm_test_" + std::to_string(::rand()) + "_" +
                               std::to_string(attempt));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command, capturing stdout/stderr separately.
inline CmdResult run_cmd(const std::string& cmd) {
  TempDir scratch;
  auto out_path = scratch / "out.txt";
  auto err_path = scratch / "err.txt";
  std::string full = cmd + " > " + out_path.string() + " 2> " + err_path.string();
  int rc = std::system(full.c_str());
  CmdResult r;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
#ifdef _WIN32
  r.exit_code = rc;
#else
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
#endif
  return r;
}

inline void put_be32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

// IDX image file (magic 0x00000803): n images of rows x cols bytes.
inline void write_idx_images(const std::filesystem::path& path,
                             const std::vector<std::vector<uint8_t>>& images, uint32_t rows,
                             uint32_t cols) {
  std::string s;
  put_be32(s, 0x00000803u);
  put_be32(s, static_cast<uint32_t>(images.size()));
  put_be32(s, rows);
  put_be32(s, cols);
  for (const auto& img : images) s.append(img.begin(), img.end());
  spit(path, s);
}

// IDX label file (magic 0x00000801).
inline void write_idx_labels(const std::filesystem::path& path,
                             const std::vector<uint8_t>& labels) {
  std::string s;
  put_be32(s, 0x00000801u);
  put_be32(s, static_cast<uint32_t>(labels.size()));
  s.append(labels.begin(), labels.end());
  spit(path, s);
}

}  // namespace testutil
