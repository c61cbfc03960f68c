#pragma once

// Scenario description for the satellite-link simulation, loaded from an
// INI-style file:
//
//   name = niue
//   duration = 120          ; virtual seconds
//   seed = 1
//   sample_interval = 1.0
//
//   [downlink]
//   bandwidth_mbps = 8
//   delay_ms = 275
//   queue_bdp = 1.0         ; or queue_bytes = <n>
//   random_loss = 0.01
//   ge_p_good_bad = 0.001   ; any ge_* key enables Gilbert-Elliott loss
//   ge_p_bad_good = 0.1
//   ge_bad_loss = 1.0
//
//   [uplink]
//   ...same keys...
//
//   [flows]
//   tcp = 1                 ; plain TCP flows
//   nc = 1                  ; flows carried through the coded tunnel
//   mss = 1400
//   start_spread_s = 0      ; flow start times drawn uniformly from [0, spread)
//
//   [tcp]
//   initial_cwnd = 10
//   min_rto_ms = 1000
//
//   [codec]
//   n = 30
//   omega = 6
//   path_mtu = 1500
//   flush_timeout_ms = 100
//   decode_window = 8
//   uplink_symbol_size = 64
//   mode = progressive  ; or full_generation
//   adaptive_overhead = false

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tcpnc/link_emu.hpp"
#include "tcpnc/rlnc.hpp"
#include "tcpnc/tcp_model.hpp"

namespace tcpnc {

struct FlowMix {
  unsigned plain = 0;
  unsigned tunneled = 0;

  unsigned total() const { return plain + tunneled; }
};

struct Scenario {
  std::string name = "scenario";
  LinkProfile downlink;
  LinkProfile uplink;
  FlowMix flows;
  TcpConfig tcp;
  double start_spread = 0.0;
  CodecConfig codec;  // symbol size is derived from path_mtu, see downlink_codec()
  std::size_t path_mtu = 1500;
  std::uint16_t uplink_symbol_size = 64;
  std::size_t decode_window = 8;
  bool adaptive_overhead = false;
  double duration = 60.0;
  std::uint64_t seed = 1;
  double sample_interval = 1.0;

  /// Throws ConfigError.
  void validate() const;

  double rtt() const { return downlink.propagation_delay + uplink.propagation_delay; }
  /// Codec used by the world gateway: symbols sized to the path MTU.
  CodecConfig downlink_codec() const;
  /// Codec used by the island gateway, which carries ACKs back.
  CodecConfig uplink_codec() const;
  /// MSS of tunneled flows, clamped to the tunnel's inner MTU.
  std::uint32_t tunneled_mss() const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace tcpnc
