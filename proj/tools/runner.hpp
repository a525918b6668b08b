#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace asymcs::cli {

using Json = nlohmann::ordered_json;

// Experiment kinds, in the order the command line lists them.
const std::vector<std::string>& ExperimentKinds();

// Exit statuses of a run.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;

struct RunRequest {
  std::string kind;
  Json config = Json::object();
  std::optional<std::uint64_t> seed;  // overrides config "seed"
  std::optional<std::string> out;     // overrides config "out"
};

struct RunOutcome {
  int status = kExitSuccess;
  std::string message;  // validation or failure message
  Json manifest;        // empty when the run failed before producing output
};

// Validates the config, runs the experiment, writes its artifacts plus
// config.json and manifest.json to the output directory. Never throws.
RunOutcome Run(const RunRequest& request);

// Lower-case hex SHA-256 of a file's bytes.
std::string Sha256File(const std::string& path);

}  // namespace asymcs::cli
