#pragma once

// JSON sidecars: every output records the tool version, the fully resolved
// configuration, the RNG stream and SHA-256 digests of its inputs. Feeding a
// sidecar back through --config reproduces the outputs byte for byte.

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "msrg/error.hpp"
#include "msrg/io/image_io.hpp"

namespace msrg::io {

using Json = nlohmann::json;

inline constexpr const char* kToolName = "msrg";
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * length);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(detail::read_bytes(path)); }

inline Json input_record(const std::filesystem::path& path) {
  return Json{{"path", path.string()}, {"sha256", sha256_file(path)}};
}

/// Skeleton shared by all sidecars; commands add their own result fields.
inline Json make_sidecar(const std::string& command, const Json& config) {
  return Json{{"tool", kToolName}, {"version", kToolVersion}, {"command", command}, {"config", config}};
}

inline void write_json(const std::filesystem::path& path, const Json& doc) {
  detail::ensure_parent_exists(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".json");
}

/// Loads a config file. A sidecar is accepted too: its "config" member is used,
/// after checking it was produced by the same subcommand.
inline Json load_config(const std::filesystem::path& path, const std::string& command) {
  const auto bytes = detail::read_bytes(path);
  Json doc;
  try {
    doc = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config '" + path.string() + "' must be a JSON object");
  if (doc.contains("tool") && doc.contains("config")) {
    if (doc.value("command", command) != command)
      throw Error(ErrorCode::InvalidConfig, "sidecar '" + path.string() + "' was written by '" +
                                                doc["command"].get<std::string>() + "', not '" + command + "'");
    return doc["config"];
  }
  return doc;
}

}  // namespace msrg::io
