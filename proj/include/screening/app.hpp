#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "screening/io.hpp"

namespace screening {

enum class Command { Solve, Figures, Verify, Compete, Sweep, Iron };

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitVerify = 4;

/// Environment variable naming the output directory when neither flag nor config gives one.
inline constexpr const char* kOutDirEnv = "SCREENING_OUT_DIR";

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;                       // one line, empty on plain success
  std::vector<std::filesystem::path> files;  // artifacts written, in order
};

CommandResult cmd_solve(const RunConfig& config, const std::filesystem::path& out);
CommandResult cmd_figures(const RunConfig& config, const std::filesystem::path& out);
CommandResult cmd_verify(const RunConfig& config, const std::filesystem::path& out);
CommandResult cmd_compete(const RunConfig& config, const std::filesystem::path& out);
CommandResult cmd_sweep(const RunConfig& config, const std::filesystem::path& out);
CommandResult cmd_iron(const RunConfig& config, const std::filesystem::path& out);

struct Invocation {
  Command command = Command::Solve;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<long long> samples;
};

/// Output directory: flag, then config, then the environment, then "out".
std::filesystem::path resolve_output_dir(const Invocation& inv, const RunConfig& config);

/// Loads the config, runs the command and maps failures to exit codes.
/// Diagnostics go to `err` as a single line.
int run(const Invocation& inv, std::ostream& err);

}  // namespace screening
