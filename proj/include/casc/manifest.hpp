#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace casc {

inline constexpr const char* kToolName = "casc";
inline constexpr const char* kToolVersion = "0.1.0";

// Insertion-ordered so manifests have a stable key order.
using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// tool/version/subcommand/seed/threads plus empty config, inputs, outputs.
ordered_json manifest_skeleton(const std::string& subcommand, std::uint64_t seed, int threads);

// Appends {path, bytes, fnv1a64} to the named file list, digesting the file
// as it is on disk right now.
void manifest_add_file(ordered_json& manifest, const char* list, const std::string& path);

void write_manifest_file(const std::string& path, const ordered_json& manifest);

} // namespace casc
