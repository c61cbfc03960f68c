#pragma once

// Experiment orchestration: wires TCP flows, tunnel endpoints and the two
// link directions onto one event loop, samples goodput and utilization, and
// writes CSV plus gnuplot scripts.

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "tcpnc/link_emu.hpp"
#include "tcpnc/scenario.hpp"
#include "tcpnc/tunnel.hpp"

namespace tcpnc {

struct SampleRow {
  double time_s = 0.0;
  double tcp_goodput_mbps = 0.0;
  double nc_goodput_mbps = 0.0;
  double utilization = 0.0;  // downlink busy fraction in the interval
  double loss_pct = 0.0;     // downlink frames lost / offered in the interval
  std::size_t queue_bytes = 0;
};

struct ClassSummary {
  unsigned flows = 0;
  double mean_goodput_mbps = 0.0;    // delivered bytes over the whole run
  double median_goodput_mbps = 0.0;  // median of the sampled intervals
  std::uint64_t delivered_bytes = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t retransmissions = 0;
};

struct RunSummary {
  ClassSummary tcp;
  ClassSummary nc;
  double mean_utilization = 0.0;
  LinkCounters downlink;
  LinkCounters uplink;
  TunnelStats world_gateway;
  TunnelStats island_gateway;
  std::uint64_t generations_decoded = 0;  // both directions
  std::uint64_t generations_failed = 0;
  std::uint64_t corrupt_segments = 0;
  std::uint64_t events = 0;

  /// Datagrams the world gateway sent per inner packet it carried.
  double downlink_overhead_ratio() const;
  double uplink_overhead_ratio() const;
};

struct RunResult {
  std::vector<SampleRow> rows;
  RunSummary summary;
};

struct RunOptions {
  /// (start time, length) bursts injected on the downlink.
  std::vector<std::pair<double, std::size_t>> downlink_bursts;
};

/// Runs one scenario. Deterministic for a given scenario (including its seed).
RunResult run(const Scenario& scenario, const RunOptions& options = {});

struct ScatterRow {
  double loss_pct = 0.0;
  double tcp_goodput_mbps = 0.0;
  double nc_goodput_mbps = 0.0;
};

/// One plain-only and one tunnel-only run per downlink loss value. The plain
/// run uses the scenario's TCP flow count and the tunneled run its NC count
/// (one flow when the count is zero). Run i uses seed + i.
std::vector<ScatterRow> sweep_loss(const Scenario& scenario, std::span<const double> losses);

struct BenchReport {
  std::uint64_t generations = 0;
  std::uint64_t delivered_per_generation = 0;
  std::uint64_t failures = 0;
  std::uint64_t packets_checked = 0;
  double encode_mbps = 0.0;
  double decode_mbps = 0.0;
};

/// Encodes and decodes `generations` full generations of random packets in
/// memory. The decoder sees the first `delivered` of the n+w coded packets
/// (all of them when zero). Failure counts are deterministic per seed;
/// throughput is wall-clock.
BenchReport codec_bench(const CodecConfig& config, std::uint64_t generations, std::uint64_t seed,
                        std::size_t delivered = 0);

inline constexpr const char* kTimeseriesHeader =
    "time_s,tcp_goodput_mbps,nc_goodput_mbps,utilization,loss_pct,queue_bytes";
inline constexpr const char* kScatterHeader = "loss_pct,tcp_goodput_mbps,nc_goodput_mbps";

/// Writes `path` (CSV) and a gnuplot script next to it (same stem, .gp).
/// Throws Error for empty input or an unwritable path.
void emit_plot_data(std::span<const SampleRow> rows, const std::filesystem::path& path);
void emit_plot_data(std::span<const ScatterRow> rows, const std::filesystem::path& path);

std::string to_csv(std::span<const SampleRow> rows);
std::string to_csv(std::span<const ScatterRow> rows);

}  // namespace tcpnc
