#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace nsci {

// Hex SHA-256 of a byte string and of a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestCheck {
    std::string name;
    bool pass = false;
};

// manifest.json: config hash, toolkit version, UTC timestamps, per-check
// summary, and every emitted file with its checksum (paths relative to dir).
nlohmann::json make_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                             const std::string& command, const std::vector<std::filesystem::path>& files,
                             const std::vector<ManifestCheck>& checks, const std::string& started);

struct ManifestDiff {
    std::vector<std::string> mismatched, missing;
    bool ok() const { return mismatched.empty() && missing.empty(); }
};

// Recomputes the checksum of every file listed in the manifest under dir.
ManifestDiff verify_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest);

std::string utc_now();

}  // namespace nsci
