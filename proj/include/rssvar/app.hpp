#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rssvar {

inline constexpr char const* kVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitUsage = 2,
    kExitRuntime = 3,
};

/// Bad command line or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Defaults for one of: etap, sweep, validate, simulate, ingest.
nlohmann::json default_config(std::string_view command);

/// Defaults, then the config file (if any), then flag overrides. Unknown keys
/// and a missing or unreadable config file raise UsageError.
nlohmann::json resolve_config(std::string_view command, std::optional<std::filesystem::path> const& file,
                              nlohmann::json const& overrides);

/// Resolved config minus settings that do not affect results (workers).
nlohmann::json provenance(std::string_view command, nlohmann::json const& config);

int run_etap(nlohmann::json const& config, std::ostream& log);
int run_sweep(nlohmann::json const& config, std::ostream& log);
int run_validate(nlohmann::json const& config, std::ostream& out, std::ostream& log);
int run_simulate(nlohmann::json const& config, std::ostream& log);
int run_ingest(nlohmann::json const& config, std::ostream& log);

/// Full command line front end; args excludes the program name.
int run_cli(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace rssvar
