#include "peakmart/manifest.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace peakmart {

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest {};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

void RunManifest::add_input(const std::filesystem::path& path)
{
    inputs.push_back(InputDigest { .path = path.string(), .sha256 = sha256_file(path) });
}

nlohmann::ordered_json RunManifest::to_json() const
{
    nlohmann::ordered_json out;
    out["tool"] = "peakmart";
    out["tool_version"] = tool_version;
    out["command"] = command;
    out["rng_seed"] = rng_seed;
    out["parameters"] = parameters;
    auto& list = out["inputs"] = nlohmann::ordered_json::array();
    for (const auto& input : inputs) {
        list.push_back({ { "path", input.path }, { "sha256", input.sha256 } });
    }
    return out;
}

void write_manifest_beside(const std::filesystem::path& output, const RunManifest& manifest)
{
    auto path = output;
    path += ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << manifest.to_json().dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

} // namespace peakmart
