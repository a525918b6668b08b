#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "asymcs/core.hpp"
#include "runner.hpp"

namespace cli = asymcs::cli;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

// Loads a config file; problems with it are validation errors.
bool LoadConfig(const std::string& path, cli::Json* config, std::string* message) {
  if (path.empty()) {
    *config = cli::Json::object();
    return true;
  }
  std::ifstream in(path);
  if (!in) {
    *message = "validation error: config: cannot open '" + path + "'";
    return false;
  }
  try {
    *config = cli::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    *message = "validation error: config: " + std::string(e.what());
    return false;
  }
  return true;
}

int Report(const std::string& label, const cli::RunOutcome& o) {
  if (!o.message.empty()) std::cerr << label << o.message << "\n";
  if (!o.manifest.is_null()) {
    std::cout << label << o.manifest["experiment"].get<std::string>() << ": " << o.manifest["status"].get<std::string>()
              << " " << o.manifest["metrics"].dump() << "\n";
  }
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed sensing experiments: coherence, sparsity, flip tests, recovery, "
               "fluorescence-microscopy simulation and infinite-dimensional sampling."};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  std::map<std::string, CommonFlags> flags;
  for (const std::string& kind : cli::ExperimentKinds()) {
    CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    CommonFlags& f = flags[kind];
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "seed for every random draw (overrides the config)");
    sub->add_option("--out", f.out, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  }

  std::vector<std::string> batch_configs;
  CLI::App* batch = app.add_subcommand("batch", "run several configs concurrently; each names its experiment");
  batch->add_option("configs", batch_configs, "JSON config files")->required();
  int jobs = 2;
  batch->add_option("--jobs", jobs, "configs run at once")->check(CLI::PositiveNumber);
  batch->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }
  if (threads > 0) asymcs::SetThreadCount(threads);

  if (batch->parsed()) {
    std::vector<cli::RunOutcome> outcomes(batch_configs.size());
    std::mutex next_mutex;
    size_t next = 0;
    auto worker = [&] {
      while (true) {
        size_t i;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= batch_configs.size()) return;
          i = next++;
        }
        cli::RunRequest request;
        std::string message;
        if (!LoadConfig(batch_configs[i], &request.config, &message)) {
          outcomes[i].status = cli::kExitValidation;
          outcomes[i].message = message;
          continue;
        }
        if (!request.config.is_object() || !request.config.contains("experiment") ||
            !request.config["experiment"].is_string()) {
          outcomes[i].status = cli::kExitValidation;
          outcomes[i].message = "validation error: experiment: batch configs must name their experiment";
          continue;
        }
        request.kind = request.config["experiment"].get<std::string>();
        outcomes[i] = cli::Run(request);
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min<int>(jobs, static_cast<int>(batch_configs.size())); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    // Severity: failure, then validation error, then non-convergence.
    bool failed = false, invalid = false, unconverged = false;
    for (size_t i = 0; i < outcomes.size(); ++i) {
      const int s = Report(batch_configs[i] + ": ", outcomes[i]);
      failed = failed || s == cli::kExitFailure;
      invalid = invalid || s == cli::kExitValidation;
      unconverged = unconverged || s == cli::kExitNotConverged;
    }
    if (failed) return cli::kExitFailure;
    if (invalid) return cli::kExitValidation;
    return unconverged ? cli::kExitNotConverged : cli::kExitSuccess;
  }

  for (const std::string& kind : cli::ExperimentKinds()) {
    if (!app.got_subcommand(kind)) continue;
    const CommonFlags& f = flags[kind];
    cli::RunRequest request{.kind = kind, .seed = f.seed, .out = f.out};
    std::string message;
    if (!LoadConfig(f.config, &request.config, &message)) {
      std::cerr << message << "\n";
      return cli::kExitValidation;
    }
    return Report("", cli::Run(request));
  }
  return cli::kExitFailure;
}
