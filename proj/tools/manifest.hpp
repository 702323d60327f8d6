#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kronocov/errors.hpp"
#include "kronocov/version.hpp"

namespace kronocov::cli {

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

/// One manifest.json per run, listing every produced file with its digest.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config, std::filesystem::path out_dir)
      : command_(std::move(command)), config_(std::move(config)), out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {}

  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_output(const std::filesystem::path& file) { outputs_.push_back(file); }
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  std::filesystem::path write() const {
    nlohmann::json j;
    j["command"] = command_;
    j["config"] = config_;
    j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
    j["version"] = kVersion;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    j["outputs"] = nlohmann::json::array();
    for (const auto& f : outputs_)
      j["outputs"].push_back({{"file", f.filename().string()}, {"sha256", sha256_file(f)},
                              {"bytes", std::filesystem::file_size(f)}});
    if (!extra_.empty()) j["summary"] = extra_;
    const auto path = out_dir_ / "manifest.json";
    std::ofstream os(path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return path;
  }

 private:
  std::string command_;
  nlohmann::json config_;
  std::filesystem::path out_dir_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::filesystem::path> outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace kronocov::cli
