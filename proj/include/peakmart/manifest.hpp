#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace peakmart {

struct InputDigest {
    std::string path;
    std::string sha256;
};

/// Everything needed to reproduce one output: tool version, the command and
/// its fully resolved parameters, input digests, and the global seed.
struct RunManifest {
    std::string tool_version = PEAKMART_VERSION;
    std::string command;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<InputDigest> inputs;
    std::uint64_t rng_seed = 0;

    void add_input(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

/// Lower-case hex SHA-256 of a file's bytes. Throws std::runtime_error if
/// the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Writes `<output>.manifest.json` next to `output`.
void write_manifest_beside(const std::filesystem::path& output, const RunManifest& manifest);

} // namespace peakmart
