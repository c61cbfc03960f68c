// tcpnc-sim: run satellite-link scenarios, loss sweeps, burst tests and the
// codec benchmark.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tcpnc/error.hpp"
#include "tcpnc/harness.hpp"
#include "tcpnc/scenario.hpp"

namespace {

using namespace tcpnc;

std::vector<double> parse_losses(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad loss value '" + item + "'");
    }
  }
  return out;
}

Scenario load_with_seed(const std::string& path, std::optional<std::uint64_t> seed) {
  Scenario s = load_scenario(path);
  if (seed) s.seed = *seed;
  return s;
}

void print_summary(const Scenario& s, const RunSummary& r) {
  fmt::print("scenario           {}\n", s.name);
  fmt::print("seed               {}\n", s.seed);
  fmt::print("tcp flows          {}  mean {:.3f} Mbps  median {:.3f} Mbps  timeouts {}\n", r.tcp.flows,
             r.tcp.mean_goodput_mbps, r.tcp.median_goodput_mbps, r.tcp.timeouts);
  fmt::print("nc flows           {}  mean {:.3f} Mbps  median {:.3f} Mbps  timeouts {}\n", r.nc.flows,
             r.nc.mean_goodput_mbps, r.nc.median_goodput_mbps, r.nc.timeouts);
  fmt::print("mean utilization   {:.4f}\n", r.mean_utilization);
  fmt::print("downlink frames    offered {}  tail-dropped {}  lost {}\n", r.downlink.offered,
             r.downlink.tail_dropped, r.downlink.lost() - r.downlink.tail_dropped);
  if (r.nc.flows > 0) {
    fmt::print("generations        decoded {}  failed {}\n", r.generations_decoded, r.generations_failed);
    fmt::print("overhead ratio     down {:.4f}  up {:.4f}\n", r.downlink_overhead_ratio(),
               r.uplink_overhead_ratio());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-coded tunnel and satellite link simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", losses_text = "0,0.005,0.01,0.02,0.05";
  std::optional<std::uint64_t> seed;
  unsigned n = 30, omega = 6;
  std::uint64_t generations = 1000, bench_seed = 1;
  std::size_t deliver = 0, burst_len = 0;
  double burst_at = -1.0;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write timeseries.csv");
  run_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--out", out_dir, "Output directory");

  auto* sweep_cmd = app.add_subcommand("sweep-loss", "Goodput vs. downlink loss, write scatter.csv");
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--losses", losses_text, "Comma-separated loss probabilities");
  sweep_cmd->add_option("--seed", seed, "Override the scenario seed");
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  auto* bench_cmd = app.add_subcommand("codec-bench", "In-memory encode/decode benchmark");
  bench_cmd->add_option("--n", n, "Generation size")->check(CLI::Range(1, 255));
  bench_cmd->add_option("--omega", omega, "Overhead packets per generation")->check(CLI::Range(0, 255));
  bench_cmd->add_option("--generations", generations, "Generations to code")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed, "RNG seed");
  bench_cmd->add_option("--deliver", deliver, "Coded packets delivered per generation (default all)");

  auto* burst_cmd = app.add_subcommand("burst-test", "Run a scenario with an injected downlink burst");
  burst_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  burst_cmd->add_option("--burst-len", burst_len, "Consecutive downlink frames to drop")->required();
  burst_cmd->add_option("--at", burst_at, "Burst start in virtual seconds (default: mid-run)");
  burst_cmd->add_option("--seed", seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      const Scenario s = load_with_seed(scenario_path, seed);
      const RunResult r = run(s);
      std::filesystem::create_directories(out_dir);
      emit_plot_data(r.rows, std::filesystem::path(out_dir) / "timeseries.csv");
      print_summary(s, r.summary);
    } else if (*sweep_cmd) {
      const Scenario s = load_with_seed(scenario_path, seed);
      const auto losses = parse_losses(losses_text);
      const auto rows = sweep_loss(s, losses);
      std::filesystem::create_directories(out_dir);
      emit_plot_data(rows, std::filesystem::path(out_dir) / "scatter.csv");
      std::cout << to_csv(rows);
    } else if (*bench_cmd) {
      CodecConfig cfg;
      cfg.generation_size = static_cast<std::uint16_t>(n);
      cfg.overhead = static_cast<std::uint16_t>(omega);
      const BenchReport r = codec_bench(cfg, generations, bench_seed, deliver);
      fmt::print("generations        {}\n", r.generations);
      fmt::print("delivered/gen      {} of {}\n", r.delivered_per_generation, n + omega);
      fmt::print("decode failures    {}\n", r.failures);
      fmt::print("encode             {:.1f} Mbps\n", r.encode_mbps);
      fmt::print("decode             {:.1f} Mbps\n", r.decode_mbps);
    } else if (*burst_cmd) {
      const Scenario s = load_with_seed(scenario_path, seed);
      RunOptions opts;
      opts.downlink_bursts.emplace_back(burst_at >= 0.0 ? burst_at : s.duration / 2.0, burst_len);
      const RunResult r = run(s, opts);
      print_summary(s, r.summary);
      fmt::print("burst              {} frames dropped by injection\n", r.summary.downlink.injected_lost);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
