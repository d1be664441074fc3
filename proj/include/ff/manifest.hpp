// ============================================================================
// ff/manifest.hpp — reproducibility manifests written beside file artifacts
// ============================================================================
//
// Every command that produces a file artifact (prompt sets, judgment logs,
// reports, training traces) drops a small JSON manifest next to it recording
// what produced the artifact: the subcommand, the effective configuration,
// a checksum of the input corpus, the tool version, and a UTC timestamp.
// Rerunning a command on unchanged inputs is detectable by comparing
// everything except the timestamp.
// ============================================================================
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace ff {

struct RunManifest {
  std::string command;              // subcommand that produced the artifact
  nlohmann::ordered_json config;    // effective settings, flag values included
  std::string corpus_checksum;      // "fnv1a64:<16 hex>" or "" when no corpus
  std::string tool_version;
  std::string timestamp;            // UTC, RFC 3339
};

// 64-bit FNV-1a over raw bytes, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

// Checksum of a file's bytes as "fnv1a64:<16 hex>". Throws IoError.
std::string file_checksum(const std::filesystem::path& path);

// Fills tool_version and timestamp; the caller supplies the rest.
RunManifest make_manifest(std::string command, nlohmann::ordered_json config,
                          std::string corpus_checksum);

std::string manifest_to_json(const RunManifest& manifest);

// "<artifact>.manifest.json", e.g. prompts.jsonl -> prompts.jsonl.manifest.json
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

// Serializes the manifest next to the artifact it describes. Throws IoError.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& artifact_path);

}  // namespace ff
