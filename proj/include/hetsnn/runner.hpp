#pragma once

// Command implementations behind the command-line tool.

#include "hetsnn/experiment.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hetsnn {

/// Parses INI text ([section] then key = value). Unknown sections or keys
/// and malformed values raise ConfigError with a "[section] key" prefix.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CommandArgs {
    std::string command;
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> snapshot;
    std::optional<std::string> task;
};

/// Written next to the outputs of each command; never part of a report.
struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string command;
    std::string started;
    std::string finished;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::vector<std::string> files;
};

/// CRC-32 of the config text and the effective seed, as 8 hex digits.
std::string config_hash(const std::string& config_text, std::uint64_t seed);

/// Runs a command and returns the list of files it wrote (relative to out).
std::vector<std::string> cmd_build(const ExperimentConfig& config, const std::filesystem::path& out);
std::vector<std::string> cmd_train(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                   const std::filesystem::path& out);
std::vector<std::string> cmd_prune(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                   const std::filesystem::path& out);
std::vector<std::string> cmd_evaluate(const ExperimentConfig& config, const Model& snapshot, TaskKind task,
                                      const std::filesystem::path& out);
std::vector<std::string> cmd_bo(const ExperimentConfig& config, const std::filesystem::path& out);

/// Metrics report of cmd_evaluate as JSON text.
std::string evaluation_report(const ExperimentConfig& config, const Model& model, TaskKind task);

/// Dispatches, writes the manifest and maps errors to exit codes:
/// 0 success, 2 config, 3 numeric, 4 I/O.
int run_command(const CommandArgs& args);

}  // namespace hetsnn
