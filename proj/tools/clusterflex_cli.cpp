// clusterflex: simulate, train and evaluate building-cluster controllers.
//
//   clusterflex simulate --config <path> [--controller rbc|sac] [--checkpoint <path>]
//   clusterflex train    --config <path> [--resume <checkpoint>] [--episodes N]
//   clusterflex evaluate --config <path> --checkpoint <path>
//
// CLUSTERFLEX_LOG sets the log level (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "clusterflex/alloc.hpp"
#include "clusterflex/experiment.hpp"

namespace {

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const char* level = std::getenv("CLUSTERFLEX_LOG");
  if (!level) return;
  const auto parsed = spdlog::level::from_str(level);
  // from_str maps unknown names to "off"; only accept an explicit "off".
  if (parsed == spdlog::level::off && std::string(level) != "off") {
    spdlog::warn("ignoring unknown CLUSTERFLEX_LOG level '{}'", level);
    return;
  }
  spdlog::set_level(parsed);
}

}  // namespace

int main(int argc, char** argv) {
  clusterflex::tune_allocator();
  configure_logging();

  CLI::App app{"Building-cluster flexibility: co-simulation hub, RL environment and SAC agent"};
  app.require_subcommand(1);

  std::string config_path, controller_name, checkpoint, resume;
  long long episodes = 0;

  auto* sim = app.add_subcommand("simulate", "run a controller over the configured simulation window");
  sim->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--controller", controller_name, "rbc or sac (defaults to the config value)")
      ->check(CLI::IsMember({"rbc", "sac"}));
  sim->add_option("--checkpoint", checkpoint, "agent checkpoint for --controller sac")->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "train a SAC agent on the training days");
  train->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--episodes", episodes, "override train.episodes")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("evaluate", "deterministic test-day rollout of a checkpoint against the RBC");
  eval->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", checkpoint, "agent checkpoint")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = clusterflex::load_experiment(config_path);
    if (*sim) {
      const auto controller = controller_name.empty()
                                  ? config.controller
                                  : clusterflex::parse_controller(controller_name, "--controller");
      std::optional<std::filesystem::path> ckpt;
      if (!checkpoint.empty()) ckpt = checkpoint;
      const auto r = clusterflex::cmd_simulate(config, controller, ckpt);
      std::cout << "wrote " << r.dir.string() << "\n";
    } else if (*train) {
      clusterflex::TrainOptions opt;
      if (!resume.empty()) opt.resume = resume;
      opt.episodes_override = episodes;
      const auto r = clusterflex::cmd_train(config, opt);
      if (r.aborted) {
        std::cerr << "training aborted: " << r.abort_reason << "\n";
        return 3;
      }
      std::cout << "wrote " << r.final_checkpoint.string() << "\n";
    } else if (*eval) {
      const auto r = clusterflex::cmd_evaluate(config, checkpoint);
      std::cout << "wrote " << r.dir.string() << "\n";
    }
  } catch (const clusterflex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
