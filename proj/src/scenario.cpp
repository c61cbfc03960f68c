#include "tcpnc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tcpnc/error.hpp"
#include "tcpnc/framing.hpp"

namespace tcpnc {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T read(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_child_optional(key);
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value for '" + key + "': " + node->data());
  }
}

void reject_unknown(const pt::ptree& tree, const std::string& where,
                    const std::set<std::string>& known) {
  for (const auto& [key, child] : tree) {
    if (!child.empty()) continue;  // a section, checked separately
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const std::set<std::string> kLinkKeys = {"bandwidth_mbps", "delay_ms", "queue_bdp", "queue_bytes",
                                         "random_loss", "ge_p_good_bad", "ge_p_bad_good",
                                         "ge_bad_loss"};

struct LinkSection {
  LinkProfile profile;
  std::optional<double> queue_bdp;
};

LinkSection read_link(const pt::ptree& root, const std::string& section, const LinkProfile& base) {
  LinkSection out{base, std::nullopt};
  const auto node = root.get_child_optional(section);
  if (!node) return out;
  reject_unknown(*node, "[" + section + "]", kLinkKeys);
  auto& p = out.profile;
  p.bandwidth_bps = read(*node, "bandwidth_mbps", p.bandwidth_bps / 1e6) * 1e6;
  p.propagation_delay = read(*node, "delay_ms", p.propagation_delay * 1e3) / 1e3;
  p.random_loss = read(*node, "random_loss", p.random_loss);
  if (node->count("queue_bytes") && node->count("queue_bdp"))
    throw ConfigError("[" + section + "] sets both queue_bytes and queue_bdp");
  if (node->count("queue_bytes")) p.queue_capacity = read<std::size_t>(*node, "queue_bytes", 0);
  if (node->count("queue_bdp")) out.queue_bdp = read(*node, "queue_bdp", 1.0);
  if (node->count("ge_p_good_bad") || node->count("ge_p_bad_good") || node->count("ge_bad_loss")) {
    GilbertElliott ge;
    ge.p_good_to_bad = read(*node, "ge_p_good_bad", ge.p_good_to_bad);
    ge.p_bad_to_good = read(*node, "ge_p_bad_good", ge.p_bad_to_good);
    ge.bad_loss = read(*node, "ge_bad_loss", ge.bad_loss);
    p.burst = ge;
  }
  return out;
}

EmissionMode parse_mode(const std::string& text) {
  if (text == "full_generation") return EmissionMode::full_generation;
  if (text == "progressive") return EmissionMode::progressive;
  throw ConfigError("unknown codec mode '" + text + "'");
}

}  // namespace

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(sample_interval > 0.0) || sample_interval > duration)
    throw ConfigError("sample interval must be positive and no longer than the run");
  if (flows.total() == 0) throw ConfigError("scenario needs at least one flow");
  if (start_spread < 0.0) throw ConfigError("start spread must be non-negative");
  if (adaptive_overhead) throw ConfigError("adaptive overhead: not implemented");
  if (tcp.mss == 0) throw ConfigError("mss must be positive");
  const auto max_plain = tcp.header_bytes + tcp.mss;
  downlink.validate(max_plain);
  uplink.validate(max_plain);
  if (flows.tunneled > 0) {
    const auto down = downlink_codec();
    const auto up = uplink_codec();
    down.validate();
    up.validate();
    if (tunneled_mss() == 0) throw ConfigError("path MTU leaves no room for TCP payload");
    if (up.max_packet_size() < kSegmentHeaderBytes)
      throw ConfigError("uplink symbol size too small to carry an ACK");
    if (decode_window == 0) throw ConfigError("decode window must be at least 1");
    const std::size_t down_frame = framing::kOuterOverhead + framing::kHeaderSize +
                                   down.generation_size + down.symbol_size;
    downlink.validate(down_frame);
  }
}

CodecConfig Scenario::downlink_codec() const {
  CodecConfig c = codec;
  c.symbol_size = static_cast<std::uint16_t>(std::min<std::size_t>(framing::inner_mtu(path_mtu, codec) + 2, 65535));
  return c;
}

CodecConfig Scenario::uplink_codec() const {
  CodecConfig c = codec;
  c.symbol_size = uplink_symbol_size;
  return c;
}

std::uint32_t Scenario::tunneled_mss() const {
  const std::size_t inner = downlink_codec().max_packet_size();
  if (inner <= tcp.header_bytes) return 0;
  return static_cast<std::uint32_t>(std::min<std::size_t>(tcp.mss, inner - tcp.header_bytes));
}

Scenario parse_scenario(std::string_view text) {
  // Comments start with ';' or '#' anywhere on a line.
  std::string cleaned;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    cleaned += line.substr(0, line.find_first_of(";#"));
    cleaned += '\n';
  }
  pt::ptree root;
  try {
    std::istringstream in{cleaned};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("scenario syntax: ") + e.what());
  }
  const std::set<std::string> sections = {"downlink", "uplink", "flows", "tcp", "codec"};
  for (const auto& [key, child] : root)
    if (!child.empty() && !sections.contains(key)) throw ConfigError("unknown section [" + key + "]");
  reject_unknown(root, "scenario", {"name", "duration", "seed", "sample_interval"});

  Scenario s;
  s.name = read<std::string>(root, "name", s.name);
  s.duration = read(root, "duration", s.duration);
  s.seed = read<std::uint64_t>(root, "seed", s.seed);
  s.sample_interval = read(root, "sample_interval", s.sample_interval);

  auto down = read_link(root, "downlink", s.downlink);
  auto up = read_link(root, "uplink", s.uplink);
  s.downlink = down.profile;
  s.uplink = up.profile;
  // Queues default to one bandwidth-delay product of their own link.
  const auto has_bytes = [&](const char* sec) {
    const auto node = root.get_child_optional(sec);
    return node && node->count("queue_bytes");
  };
  if (!has_bytes("downlink"))
    s.downlink.queue_capacity =
        static_cast<std::size_t>(std::llround(bdp(s.downlink, s.rtt()) * down.queue_bdp.value_or(1.0)));
  if (!has_bytes("uplink"))
    s.uplink.queue_capacity =
        static_cast<std::size_t>(std::llround(bdp(s.uplink, s.rtt()) * up.queue_bdp.value_or(1.0)));

  if (const auto flows = root.get_child_optional("flows")) {
    reject_unknown(*flows, "[flows]", {"tcp", "nc", "mss", "start_spread_s"});
    s.flows.plain = read(*flows, "tcp", s.flows.plain);
    s.flows.tunneled = read(*flows, "nc", s.flows.tunneled);
    s.tcp.mss = read(*flows, "mss", s.tcp.mss);
    s.start_spread = read(*flows, "start_spread_s", s.start_spread);
  }
  if (const auto tcp = root.get_child_optional("tcp")) {
    reject_unknown(*tcp, "[tcp]", {"initial_cwnd", "min_rto_ms"});
    s.tcp.initial_cwnd = read(*tcp, "initial_cwnd", s.tcp.initial_cwnd);
    s.tcp.min_rto = read(*tcp, "min_rto_ms", s.tcp.min_rto * 1e3) / 1e3;
  }
  if (const auto codec = root.get_child_optional("codec")) {
    reject_unknown(*codec, "[codec]",
                   {"n", "omega", "path_mtu", "flush_timeout_ms", "decode_window",
                    "uplink_symbol_size", "mode", "adaptive_overhead"});
    const auto n = read<unsigned>(*codec, "n", s.codec.generation_size);
    const auto w = read<unsigned>(*codec, "omega", s.codec.overhead);
    if (n < 1 || n > 255) throw ConfigError("codec n must be in 1..255");
    if (w > 255) throw ConfigError("codec omega must be in 0..255");
    s.codec.generation_size = static_cast<std::uint16_t>(n);
    s.codec.overhead = static_cast<std::uint16_t>(w);
    s.path_mtu = read(*codec, "path_mtu", s.path_mtu);
    s.codec.flush_timeout = read(*codec, "flush_timeout_ms", s.codec.flush_timeout * 1e3) / 1e3;
    s.decode_window = read(*codec, "decode_window", s.decode_window);
    s.uplink_symbol_size = read(*codec, "uplink_symbol_size", s.uplink_symbol_size);
    s.codec.mode = parse_mode(read<std::string>(*codec, "mode", "progressive"));
    s.adaptive_overhead = read(*codec, "adaptive_overhead", false);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace tcpnc
