#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "beamspace/harness.hpp"

namespace {

int log_level() {
  const char* env = std::getenv("BEAMSPACE_LOG");
  if (!env || !*env) return 1;
  try {
    return std::stoi(env);
  } catch (const std::exception&) {
    return 1;
  }
}

void write_outputs(const beamspace::harness::ExperimentResult& res,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const int level = log_level();
  const std::string csv_path = out_dir + "/" + res.name + ".csv";
  beamspace::harness::write_csv(csv_path, res.rows);
  if (level >= 1) {
    std::cout << "wrote " << csv_path << " (" << res.rows.size() << " rows)\n";
  }
  if (!res.trace.empty()) {
    const std::string trace_path = out_dir + "/" + res.name + "_trace.tsv";
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
    beamspace::sim::write_trace(out, res.trace);
    if (level >= 1) {
      std::cout << "wrote " << trace_path << " (" << res.trace.size()
                << " events)\n";
    }
    if (level >= 2) std::cerr << beamspace::sim::format_trace(res.trace);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beamspace link experiments: channel maps, beam training, "
               "power allocation, tracking and stream sync"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int trials = 0;
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--out", out_dir, "output directory (default .)");
  auto* seed_opt = app.add_option("--seed", seed, "override the RNG seed");
  auto* trials_opt =
      app.add_option("--trials", trials, "override the trial/instance count");

  auto* cmd_rate_map =
      app.add_subcommand("rate-map", "per-angle SINR and rate grid");
  auto* cmd_rate_eta =
      app.add_subcommand("rate-vs-eta", "policy rates across the SNR threshold");
  auto* cmd_outage =
      app.add_subcommand("outage", "multi-link outage, analytic and sampled");
  auto* cmd_train =
      app.add_subcommand("train", "sweep planning and beam pairing counts");
  auto* cmd_track =
      app.add_subcommand("track", "blockage recovery protocol trace");
  auto* cmd_sync =
      app.add_subcommand("sync", "split-stream transmission cycles");
  auto* cmd_validate = app.add_subcommand(
      "validate", "closed-form allocators against the exhaustive search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    namespace hn = beamspace::harness;
    hn::ExperimentConfig cfg = config_path.empty()
                                   ? hn::default_config()
                                   : hn::load_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (trials_opt->count() > 0) {
      if (trials < 1) throw hn::ConfigError("config: trials must be positive");
      cfg.trials = trials;
    }

    if (cmd_validate->parsed()) {
      const int instances = trials_opt->count() > 0 ? trials : 200;
      const hn::ValidationReport rep = hn::run_validation(cfg, instances);
      hn::ExperimentResult res;
      res.name = "validate";
      res.rows = rep.rows;
      write_outputs(res, out_dir);
      if (rep.oracle_below_policies > 0 || rep.regime_mismatches > 0) {
        std::cerr << "validate: " << rep.oracle_below_policies
                  << " oracle shortfalls, " << rep.regime_mismatches
                  << " regime identity mismatches\n";
        return 1;
      }
      if (log_level() >= 1) {
        std::cout << "validate: " << rep.instances << " instances clean ("
                  << rep.regime_cases << " in the equal-split regime)\n";
      }
      return 0;
    }

    hn::ExperimentResult res;
    if (cmd_rate_map->parsed()) {
      res = hn::run_rate_map(cfg);
    } else if (cmd_rate_eta->parsed()) {
      res = hn::run_rate_vs_eta(cfg);
    } else if (cmd_outage->parsed()) {
      res = hn::run_outage(cfg);
    } else if (cmd_train->parsed()) {
      res = hn::run_training_demo(cfg);
    } else if (cmd_track->parsed()) {
      res = hn::run_tracking_scenario(cfg);
    } else {
      res = hn::run_sync_demo(cfg);
    }
    write_outputs(res, out_dir);
    return 0;
  } catch (const beamspace::harness::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const beamspace::harness::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
