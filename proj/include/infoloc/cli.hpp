#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace infoloc::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kParse = 3;
inline constexpr int kCapacity = 4;

/// Environment variable naming a JSON file with default optimizer settings.
inline constexpr const char* kConfigEnv = "INFOLOC_CONFIG";

/// Runs one command line (argv[0] included). Reports go to `out` (or the
/// --out file), machine-readable errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& data);

/// Attaches the run manifest: command, inputs, config, seed, tool version and
/// the digest of the report body (computed before the manifest is added).
nlohmann::json with_manifest(nlohmann::json body, const nlohmann::json& manifest_fields);

}  // namespace infoloc::cli
