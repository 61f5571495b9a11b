#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "reliroute/error.hpp"

namespace reliroute {

inline constexpr const char* kToolVersion = "1.0.0";

// Lowercase hex SHA-256 of a file's bytes.
inline std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate digest context");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> inputs;  // role -> path
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::system_clock::time_point finished = started;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [role, path] : inputs) {
      in[role] = {{"path", path}, {"sha256", sha256_file(path)}};
    }
    j["inputs"] = in;
    j["config"] = config;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    j["started_utc"] = utc_timestamp(started);
    j["finished_utc"] = utc_timestamp(finished);
    return j;
  }

  // Writes `manifest.json` into dir, replacing any earlier one.
  void write(const std::filesystem::path& dir) {
    finished = std::chrono::system_clock::now();
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
    f << to_json().dump(2) << '\n';
  }
};

}  // namespace reliroute
