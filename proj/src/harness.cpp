#include "tcpnc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include <fmt/format.h>

#include "tcpnc/error.hpp"
#include "tcpnc/framing.hpp"

namespace tcpnc {
namespace {

constexpr std::uint32_t kPlainTag = 0;
constexpr std::uint32_t kTunnelTag = 1;

std::uint64_t splitmix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double upper = *mid;
  return (upper + *std::max_element(v.begin(), mid)) / 2.0;
}

class Simulation {
 public:
  Simulation(const Scenario& scenario, const RunOptions& options)
      : sc_(scenario),
        down_(events_, scenario.downlink, splitmix(scenario.seed, 1), scenario.sample_interval),
        up_(events_, scenario.uplink, splitmix(scenario.seed, 2), scenario.sample_interval) {
    if (sc_.flows.tunneled > 0) {
      gw_.emplace(Role::world_gateway, sc_.downlink_codec(), splitmix(sc_.seed, 3), sc_.decode_window);
      gi_.emplace(Role::island_gateway, sc_.uplink_codec(), splitmix(sc_.seed, 4), sc_.decode_window);
    }
    for (const auto& [start, length] : options.downlink_bursts) down_.inject_burst(start, length);

    std::mt19937_64 start_rng(splitmix(sc_.seed, 5));
    for (unsigned i = 0; i < sc_.flows.total(); ++i) {
      const bool tunneled = i >= sc_.flows.plain;
      TcpConfig cfg = sc_.tcp;
      if (tunneled) cfg.mss = sc_.tunneled_mss();
      flows_.push_back(FlowSlot{TcpFlow(i, cfg), TcpReceiver(i), tunneled, std::nullopt});
      const double u = static_cast<double>(start_rng() >> 11) * 0x1.0p-53;
      events_.schedule(u * sc_.start_spread, [this, i] { send(i, flows_[i].sender.start(events_.now())); });
    }

    down_.on_delivery([this](Frame&& f, double) { on_downlink(std::move(f)); });
    up_.on_delivery([this](Frame&& f, double) { on_uplink(std::move(f)); });

    const auto samples = static_cast<std::size_t>(std::floor(sc_.duration / sc_.sample_interval + 1e-9));
    for (std::size_t i = 1; i <= samples; ++i)
      events_.schedule(i * sc_.sample_interval, [this] { sample(); });
  }

  RunResult run() {
    events_.advance(sc_.duration);
    RunResult result;
    result.rows = std::move(rows_);
    auto& s = result.summary;
    for (const auto& f : flows_) {
      ClassSummary& c = f.tunneled ? s.nc : s.tcp;
      ++c.flows;
      c.delivered_bytes += f.receiver.delivered_bytes();
      c.timeouts += f.sender.timeouts();
      c.retransmissions += f.sender.retransmissions();
    }
    std::vector<double> tcp, nc, util;
    for (const auto& r : result.rows) {
      tcp.push_back(r.tcp_goodput_mbps);
      nc.push_back(r.nc_goodput_mbps);
      util.push_back(r.utilization);
    }
    const double sampled = result.rows.size() * sc_.sample_interval;
    s.tcp.mean_goodput_mbps = s.tcp.delivered_bytes * 8.0 / sc_.duration / 1e6;
    s.nc.mean_goodput_mbps = s.nc.delivered_bytes * 8.0 / sc_.duration / 1e6;
    s.tcp.median_goodput_mbps = median(tcp);
    s.nc.median_goodput_mbps = median(nc);
    s.mean_utilization = sampled > 0 ? down_.busy_time(0.0, sampled) / sampled : 0.0;
    s.downlink = down_.counters();
    s.uplink = up_.counters();
    if (gw_) {
      s.world_gateway = gw_->stats();
      s.island_gateway = gi_->stats();
    }
    s.generations_decoded = s.world_gateway.generations_decoded + s.island_gateway.generations_decoded;
    s.generations_failed = s.world_gateway.generations_failed + s.island_gateway.generations_failed;
    s.corrupt_segments = corrupt_segments_;
    s.events = events_.dispatched();
    return result;
  }

 private:
  struct FlowSlot {
    TcpFlow sender;
    TcpReceiver receiver;
    bool tunneled;
    std::optional<double> timer_event;
  };

  struct Flusher {
    std::optional<double> scheduled;
  };

  double now() const { return events_.now(); }

  void send(unsigned flow, const std::vector<Segment>& segments) {
    FlowSlot& slot = flows_[flow];
    for (const auto& seg : segments) {
      Bytes packet = encode_segment(seg);
      if (slot.tunneled) {
        offer_datagrams(down_, gw_->ingress(packet, now()));
      } else {
        const auto size = static_cast<std::uint32_t>(packet.size());
        down_.offer(Frame{std::move(packet), size, kPlainTag});
      }
    }
    if (slot.tunneled) arm_flush(*gw_, gw_flush_, down_);
    arm_timer(flow);
  }

  void arm_timer(unsigned flow) {
    FlowSlot& slot = flows_[flow];
    const auto deadline = slot.sender.rto_deadline();
    if (!deadline || (slot.timer_event && *slot.timer_event <= *deadline)) return;
    slot.timer_event = *deadline;
    events_.schedule(*deadline, [this, flow] {
      FlowSlot& s = flows_[flow];
      s.timer_event.reset();
      send(flow, s.sender.on_timer(now()));
    });
  }

  void arm_flush(TunnelEndpoint& ep, Flusher& flusher, Link& link) {
    const auto deadline = ep.flush_deadline();
    if (!deadline || (flusher.scheduled && *flusher.scheduled <= *deadline)) return;
    flusher.scheduled = *deadline;
    events_.schedule(*deadline, [this, &ep, &flusher, &link] {
      flusher.scheduled.reset();
      offer_datagrams(link, ep.tick(now()));
      arm_flush(ep, flusher, link);
    });
  }

  static void offer_datagrams(Link& link, std::vector<Bytes> datagrams) {
    for (auto& dg : datagrams) {
      const auto size = static_cast<std::uint32_t>(dg.size() + framing::kOuterOverhead);
      link.offer(Frame{std::move(dg), size, kTunnelTag});
    }
  }

  std::optional<Segment> decode(const Bytes& packet) {
    auto seg = decode_segment(packet);
    if (!seg || seg->flow >= flows_.size()) {
      ++corrupt_segments_;
      return std::nullopt;
    }
    return seg;
  }

  void on_downlink(Frame&& frame) {
    if (frame.tag == kPlainTag) {
      if (auto seg = decode(frame.data)) on_data(*seg);
      return;
    }
    for (const auto& inner : gi_->egress(frame.data))
      if (auto seg = decode(inner)) on_data(*seg);
  }

  void on_data(const Segment& seg) {
    FlowSlot& slot = flows_[seg.flow];
    Bytes ack = encode_segment(slot.receiver.on_segment(seg));
    if (slot.tunneled) {
      offer_datagrams(up_, gi_->ingress(ack, now()));
      arm_flush(*gi_, gi_flush_, up_);
    } else {
      const auto size = static_cast<std::uint32_t>(ack.size());
      up_.offer(Frame{std::move(ack), size, kPlainTag});
    }
  }

  void on_uplink(Frame&& frame) {
    if (frame.tag == kPlainTag) {
      if (auto seg = decode(frame.data)) on_ack(*seg);
      return;
    }
    for (const auto& inner : gw_->egress(frame.data))
      if (auto seg = decode(inner)) on_ack(*seg);
  }

  void on_ack(const Segment& ack) { send(ack.flow, flows_[ack.flow].sender.on_ack(ack.ack, now())); }

  void sample() {
    const double t = now();
    const double dt = sc_.sample_interval;
    std::uint64_t tcp = 0, nc = 0;
    for (const auto& f : flows_) (f.tunneled ? nc : tcp) += f.receiver.delivered_bytes();
    const auto& c = down_.counters();
    SampleRow row;
    row.time_s = t;
    row.tcp_goodput_mbps = (tcp - last_tcp_) * 8.0 / dt / 1e6;
    row.nc_goodput_mbps = (nc - last_nc_) * 8.0 / dt / 1e6;
    row.utilization = std::clamp(down_.busy_time(t - dt, t) / dt, 0.0, 1.0);
    const auto offered = c.offered - last_offered_;
    const auto lost = c.lost() - last_lost_;
    row.loss_pct = offered ? 100.0 * static_cast<double>(lost) / static_cast<double>(offered) : 0.0;
    row.queue_bytes = down_.queued_bytes();
    rows_.push_back(row);
    last_tcp_ = tcp;
    last_nc_ = nc;
    last_offered_ = c.offered;
    last_lost_ = c.lost();
  }

  Scenario sc_;
  EventQueue events_;
  Link down_;
  Link up_;
  std::optional<TunnelEndpoint> gw_;
  std::optional<TunnelEndpoint> gi_;
  Flusher gw_flush_;
  Flusher gi_flush_;
  std::vector<FlowSlot> flows_;
  std::vector<SampleRow> rows_;
  std::uint64_t last_tcp_ = 0, last_nc_ = 0, last_offered_ = 0, last_lost_ = 0;
  std::uint64_t corrupt_segments_ = 0;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

}  // namespace

double RunSummary::downlink_overhead_ratio() const {
  return world_gateway.inner_in ? static_cast<double>(world_gateway.datagrams_sent) / world_gateway.inner_in
                                : 0.0;
}

double RunSummary::uplink_overhead_ratio() const {
  return island_gateway.inner_in
             ? static_cast<double>(island_gateway.datagrams_sent) / island_gateway.inner_in
             : 0.0;
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  Simulation sim(scenario, options);
  return sim.run();
}

std::vector<ScatterRow> sweep_loss(const Scenario& scenario, std::span<const double> losses) {
  if (losses.empty()) throw ConfigError("loss sweep needs at least one loss value");
  for (double p : losses)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("loss values must be probabilities");
  std::vector<ScatterRow> rows;
  std::uint64_t index = 0;
  for (double p : losses) {
    Scenario plain = scenario;
    plain.downlink.random_loss = p;
    plain.flows = FlowMix{std::max(1u, scenario.flows.plain), 0};
    plain.seed = scenario.seed + index++;
    Scenario coded = scenario;
    coded.downlink.random_loss = p;
    coded.flows = FlowMix{0, std::max(1u, scenario.flows.tunneled)};
    coded.seed = scenario.seed + index++;
    rows.push_back(ScatterRow{p * 100.0, run(plain).summary.tcp.mean_goodput_mbps,
                              run(coded).summary.nc.mean_goodput_mbps});
  }
  return rows;
}

BenchReport codec_bench(const CodecConfig& config, std::uint64_t generations, std::uint64_t seed,
                        std::size_t delivered) {
  config.validate();
  if (generations == 0) throw ConfigError("benchmark needs at least one generation");
  const std::size_t n = config.generation_size;
  const std::size_t total = n + config.overhead;
  if (delivered == 0) delivered = total;
  if (delivered > total) throw ConfigError("cannot deliver more packets than are emitted");

  Rng rng(seed);
  BenchReport report;
  report.generations = generations;
  report.delivered_per_generation = delivered;
  std::chrono::duration<double> encode_time{0}, decode_time{0};
  std::uint64_t source_bytes = 0;
  std::vector<Bytes> packets(n, Bytes(config.max_packet_size()));
  for (std::uint64_t g = 0; g < generations; ++g) {
    for (auto& p : packets)
      for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    source_bytes += n * config.max_packet_size();

    auto t0 = std::chrono::steady_clock::now();
    Generation gen(static_cast<std::uint32_t>(g), config);
    for (const auto& p : packets) gen.push(p);
    std::vector<CodedPacket> coded;
    coded.reserve(delivered);
    for (std::size_t i = 0; i < delivered; ++i) coded.push_back(gen.emit(rng));
    auto t1 = std::chrono::steady_clock::now();
    Decoder dec(gen.id());
    for (const auto& cp : coded) dec.push(cp);
    auto released = dec.release();
    auto t2 = std::chrono::steady_clock::now();
    encode_time += t1 - t0;
    decode_time += t2 - t1;

    if (!dec.decoded() || released.packets != packets) ++report.failures;
    report.packets_checked += released.packets.size();
  }
  const double bits = source_bytes * 8.0;
  report.encode_mbps = encode_time.count() > 0 ? bits / encode_time.count() / 1e6 : 0.0;
  report.decode_mbps = decode_time.count() > 0 ? bits / decode_time.count() / 1e6 : 0.0;
  return report;
}

std::string to_csv(std::span<const SampleRow> rows) {
  std::string out = std::string(kTimeseriesHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{:.3f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.time_s, r.tcp_goodput_mbps,
                       r.nc_goodput_mbps, r.utilization, r.loss_pct, r.queue_bytes);
  return out;
}

std::string to_csv(std::span<const ScatterRow> rows) {
  std::string out = std::string(kScatterHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{:.6f},{:.6f},{:.6f}\n", r.loss_pct, r.tcp_goodput_mbps, r.nc_goodput_mbps);
  return out;
}

void emit_plot_data(std::span<const SampleRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw Error("no rows to write");
  write_file(path, to_csv(rows));
  auto script = path;
  script.replace_extension(".gp");
  auto png = path;
  png.replace_extension(".png");
  write_file(script, fmt::format(
                         "set datafile separator ','\n"
                         "set key autotitle columnhead\n"
                         "set terminal pngcairo size 1200,500\n"
                         "set output '{}'\n"
                         "set xlabel 'time (s)'\n"
                         "set ylabel 'goodput (Mbps)'\n"
                         "set y2label 'utilization'\n"
                         "set y2range [0:1]\n"
                         "set y2tics\n"
                         "plot '{}' using 1:2 with lines title 'TCP', \\\n"
                         "     '' using 1:3 with lines title 'TCP/NC', \\\n"
                         "     '' using 1:4 axes x1y2 with lines title 'utilization'\n",
                         png.filename().string(), path.filename().string()));
}

void emit_plot_data(std::span<const ScatterRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw Error("no rows to write");
  write_file(path, to_csv(rows));
  auto script = path;
  script.replace_extension(".gp");
  auto png = path;
  png.replace_extension(".png");
  write_file(script, fmt::format(
                         "set datafile separator ','\n"
                         "set key autotitle columnhead\n"
                         "set terminal pngcairo size 800,600\n"
                         "set output '{}'\n"
                         "set xlabel 'packet loss (%)'\n"
                         "set ylabel 'goodput (Mbps)'\n"
                         "plot '{}' using 1:2 with points pt 7 title 'TCP', \\\n"
                         "     '' using 1:3 with points pt 5 title 'TCP/NC'\n",
                         png.filename().string(), path.filename().string()));
}

}  // namespace tcpnc
