#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vidprobe/binary_io.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/run_config.hpp"

namespace vidprobe {

inline std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(binary::read_file(path)); }

/// Resolved configuration plus digests of every input file.
inline nlohmann::ordered_json provenance_record(const RunConfig& config, std::string_view command,
                                                const std::vector<std::filesystem::path>& inputs) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = to_json(config);
  auto& digests = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : inputs) {
    nlohmann::ordered_json d;
    d["path"] = p.string();
    d["sha256"] = file_sha256(p);
    digests.push_back(std::move(d));
  }
  return j;
}

/// Writes `<output>.config.json` (reloadable with --config) and
/// `<output>.provenance.json` next to the output file.
inline void write_provenance(const std::filesystem::path& output, const RunConfig& config, std::string_view command,
                             const std::vector<std::filesystem::path>& inputs) {
  auto cfg_path = output;
  cfg_path += ".config.json";
  auto prov_path = output;
  prov_path += ".provenance.json";
  binary::write_file_atomic(cfg_path, to_json(config).dump(2) + "\n");
  binary::write_file_atomic(prov_path, provenance_record(config, command, inputs).dump(2) + "\n");
}

}  // namespace vidprobe
