#include "ff/manifest.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "ff/errors.hpp"
#include "ff/eval.hpp"  // utc_timestamp_now
#include "ff/version.hpp"

namespace ff {

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksumming");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed while checksumming " + path.string());
  return "fnv1a64:" + fnv1a64_hex(buffer.str());
}

RunManifest make_manifest(std::string command, nlohmann::ordered_json config,
                          std::string corpus_checksum) {
  RunManifest manifest;
  manifest.command = std::move(command);
  manifest.config = std::move(config);
  manifest.corpus_checksum = std::move(corpus_checksum);
  manifest.tool_version = std::string(kToolName) + " " + std::string(kToolVersion);
  manifest.timestamp = utc_timestamp_now();
  return manifest;
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json obj;
  obj["command"] = manifest.command;
  obj["config"] = manifest.config;
  obj["corpus_checksum"] = manifest.corpus_checksum;
  obj["tool_version"] = manifest.tool_version;
  obj["timestamp"] = manifest.timestamp;
  return obj.dump(2) + "\n";
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  std::filesystem::path out = artifact;
  out += ".manifest.json";
  return out;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& artifact_path) {
  const std::filesystem::path path = manifest_path_for(artifact_path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ff
