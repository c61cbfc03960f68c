#pragma once

// Network-coded tunnel endpoint. One instance sits at each end of the
// satellite path: the world gateway encodes traffic heading to the island and
// decodes what comes back, the island gateway does the opposite. Transport is
// abstract: the caller moves byte vectors and supplies virtual time.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tcpnc/rlnc.hpp"

namespace tcpnc {

enum class Role { world_gateway, island_gateway };

struct TunnelStats {
  std::uint64_t datagrams_sent = 0;
  std::uint64_t datagrams_received = 0;
  std::uint64_t generations_sealed = 0;
  std::uint64_t generations_decoded = 0;
  std::uint64_t generations_failed = 0;
  std::uint64_t innovative = 0;
  std::uint64_t redundant = 0;
  std::uint64_t inner_in = 0;
  std::uint64_t inner_out = 0;
  std::uint64_t oversize_drops = 0;
  std::uint64_t malformed_drops = 0;
  std::uint64_t stale_drops = 0;
};

class TunnelEndpoint {
 public:
  static constexpr std::size_t kDefaultDecodeWindow = 8;

  TunnelEndpoint(Role role, const CodecConfig& config, std::uint64_t seed,
                 std::size_t decode_window = kDefaultDecodeWindow);

  /// Encodes one inner packet; returns the datagrams due now, in emission order.
  /// Packets above inner_mtu() are counted in oversize_drops and discarded.
  std::vector<Bytes> ingress(std::span<const std::uint8_t> inner_packet, double now);

  /// Decodes one datagram from the peer; returns newly recovered inner packets.
  std::vector<Bytes> egress(std::span<const std::uint8_t> datagram);

  /// Seals the open generation once it has been waiting flush_timeout.
  std::vector<Bytes> tick(double now);

  /// Virtual time at which tick() will seal the open generation.
  std::optional<double> flush_deadline() const;

  Role role() const { return role_; }
  const CodecConfig& config() const { return config_; }
  const TunnelStats& stats() const { return stats_; }
  std::size_t inner_mtu() const { return config_.max_packet_size(); }
  std::size_t open_generation_size() const { return open_.size(); }
  std::size_t decode_window_size() const { return decoders_.size(); }

 private:
  void send(std::vector<Bytes>& out, bool final_emission);
  void roll();

  Role role_;
  CodecConfig config_;
  std::size_t window_;
  Rng rng_;
  std::vector<Emission> schedule_;
  Generation open_;
  std::uint32_t next_id_ = 1;
  double first_push_ = 0.0;
  std::size_t schedule_pos_ = 0;
  std::size_t repairs_sent_ = 0;
  std::map<std::uint32_t, Decoder> decoders_;
  std::optional<std::uint32_t> horizon_;  // generations below this id are closed
  TunnelStats stats_;
};

}  // namespace tcpnc
