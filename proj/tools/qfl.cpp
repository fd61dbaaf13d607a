// Command line front end for the experiment harness.
//
//   qfl run <config.json> [--data-dir DIR] [--out-dir DIR] [--seeds ...]
//   qfl validate <config.json>
//   qfl plot <out_dir>
//   qfl datasets check <data_dir>
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qfl/errors.hpp"
#include "qfl/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

int classify(const std::exception& e) {
  if (dynamic_cast<const qfl::ConfigError*>(&e) != nullptr) {
    return kExitConfig;
  }
  if (dynamic_cast<const qfl::NotFoundError*>(&e) != nullptr ||
      dynamic_cast<const qfl::FormatError*>(&e) != nullptr) {
    return kExitData;
  }
  return kExitRuntime;
}

int run_command(const std::string& config_path,
                const std::optional<std::string>& data_dir,
                const std::optional<std::string>& out_dir,
                const std::vector<std::uint64_t>& seeds, bool no_baselines,
                bool skip_plots) {
  qfl::harness::RunConfig cfg = qfl::harness::load_config(config_path);
  if (!seeds.empty()) {
    cfg.seeds = seeds;
  }
  if (out_dir.has_value()) {
    cfg.out_dir = *out_dir;
  }
  if (no_baselines) {
    cfg.with_baselines = false;
  }
  qfl::harness::validate_config(cfg);
  const std::filesystem::path resolved_data =
      qfl::harness::resolve_data_dir(cfg, data_dir);

  std::cout << "running '" << cfg.name << "' ("
            << (cfg.experiment == qfl::harness::ExperimentKind::MCSD ? "mcsd"
                                                                     : "mcmd")
            << "/"
            << (cfg.topology == qfl::netmodel::TopologyKind::Star ? "star"
                                                                  : "ring")
            << ", " << cfg.num_clients() << " clients, " << cfg.rounds
            << " rounds, " << cfg.seeds.size() << " seeds)" << std::endl;

  const qfl::harness::ExperimentResult result =
      qfl::harness::run_experiment(cfg, resolved_data);
  const std::filesystem::path summary =
      qfl::harness::emit_metrics_csv(result, cfg.out_dir);
  std::cout << "wrote " << summary.string() << std::endl;

  for (const qfl::harness::RunRecord& run : result.runs) {
    std::cout << "  seed " << run.seed << ": final test accuracy "
              << run.final_eval.aggregate << " (messages "
              << run.ledger_totals.messages_sent << ", bytes "
              << run.ledger_totals.payload_bytes << ", "
              << run.wall_seconds << " s)" << std::endl;
  }
  if (!skip_plots) {
    for (const auto& plot : qfl::harness::emit_plots(cfg.out_dir)) {
      std::cout << "wrote " << plot.string() << std::endl;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum federated learning experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_flag;
  std::string data_dir_flag;
  std::vector<std::uint64_t> seeds_flag;
  bool no_baselines = false;
  bool skip_plots = false;

  CLI::App* run = app.add_subcommand("run", "Execute a run configuration");
  run->add_option("config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--data-dir", data_dir_flag,
                  "Dataset directory (overrides QFL_DATA_DIR and the config)");
  run->add_option("--out-dir", out_dir_flag, "Output directory override");
  run->add_option("--seeds", seeds_flag, "Seed list override");
  run->add_flag("--no-baselines", no_baselines, "Skip the baseline trainers");
  run->add_flag("--no-plots", skip_plots, "Skip chart rendering");

  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate", "Parse a config and print it resolved");
  validate->add_option("config", validate_path, "Run configuration (JSON)")
      ->required();

  std::string plot_dir;
  CLI::App* plot =
      app.add_subcommand("plot", "Render charts from emitted metrics");
  plot->add_option("out_dir", plot_dir, "Directory holding run summaries")
      ->required();

  CLI::App* datasets = app.add_subcommand("datasets", "Dataset utilities");
  datasets->require_subcommand(1);
  std::string check_dir;
  CLI::App* check = datasets->add_subcommand("check", "Verify on-disk datasets");
  check->add_option("data_dir", check_dir, "Dataset directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const std::optional<std::string> data_override =
          data_dir_flag.empty() ? std::nullopt
                                : std::optional<std::string>(data_dir_flag);
      const std::optional<std::string> out_override =
          out_dir_flag.empty() ? std::nullopt
                               : std::optional<std::string>(out_dir_flag);
      return run_command(config_path, data_override, out_override, seeds_flag,
                         no_baselines, skip_plots);
    }
    if (validate->parsed()) {
      const qfl::harness::RunConfig cfg = qfl::harness::load_config(validate_path);
      std::cout << cfg.to_json_string() << std::endl;
      return kExitOk;
    }
    if (plot->parsed()) {
      for (const auto& file : qfl::harness::emit_plots(plot_dir)) {
        std::cout << "wrote " << file.string() << std::endl;
      }
      return kExitOk;
    }
    if (check->parsed()) {
      const bool ok = qfl::harness::datasets_check(check_dir, std::cout);
      return ok ? kExitOk : kExitData;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return classify(e);
  }
  return kExitOk;
}
