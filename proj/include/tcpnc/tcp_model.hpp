#pragma once

// Reno-style loss-reactive TCP sender and cumulative-ACK receiver. Sequence
// numbers count whole segments. The sender is a pure state machine: the
// caller delivers ACKs and timer expiries and transmits what it returns.

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tcpnc/link_emu.hpp"
#include "tcpnc/rlnc.hpp"

namespace tcpnc {

struct TcpConfig {
  std::uint32_t mss = 1400;
  std::uint32_t header_bytes = 40;  // IPv4 + TCP, no options
  double initial_cwnd = 10.0;
  double initial_ssthresh = std::numeric_limits<double>::infinity();
  double initial_rto = 1.0;
  double min_rto = 1.0;
  double max_rto = 60.0;
  unsigned dupack_threshold = 3;
};

enum class TcpState { slow_start, congestion_avoidance, fast_recovery };
enum class LossSignal { triple_dupack, rto };

struct Segment {
  std::uint32_t flow = 0;
  std::uint64_t seq = 0;       // data: segment index
  std::uint64_t ack = 0;       // ACK: next expected segment index
  std::uint16_t payload = 0;   // data bytes carried
  bool is_ack = false;
  bool retransmission = false;

  bool operator==(const Segment&) const = default;
};

inline constexpr std::size_t kSegmentHeaderBytes = 40;

/// Inner IP packet image of a segment: a 40-byte header followed by a
/// deterministic payload pattern the receiver can verify.
Bytes encode_segment(const Segment& segment);
/// nullopt when the header or the payload pattern does not check out.
std::optional<Segment> decode_segment(std::span<const std::uint8_t> packet);

/// Bandwidth-delay product in bytes.
double bdp(const LinkProfile& profile, double rtt);

class TcpFlow {
 public:
  explicit TcpFlow(std::uint32_t id, const TcpConfig& config = {});

  /// Opens the initial window.
  std::vector<Segment> start(double now);
  std::vector<Segment> on_ack(std::uint64_t ack, double now);
  std::vector<Segment> on_loss_signal(LossSignal kind, double now);
  /// Retransmission timer check; a no-op unless the deadline has passed.
  std::vector<Segment> on_timer(double now);

  std::uint32_t id() const { return id_; }
  const TcpConfig& config() const { return config_; }
  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }
  TcpState state() const { return state_; }
  std::uint64_t snd_una() const { return snd_una_; }
  std::uint64_t snd_nxt() const { return snd_nxt_; }
  std::uint64_t in_flight() const { return snd_nxt_ - snd_una_; }
  unsigned dupacks() const { return dupacks_; }
  double rto() const { return rto_; }
  std::optional<double> srtt() const { return srtt_; }
  std::optional<double> rto_deadline() const { return deadline_; }
  /// Changes whenever the timer is re-armed, so stale expiry events can be ignored.
  std::uint64_t timer_epoch() const { return timer_epoch_; }
  std::uint64_t segments_sent() const { return segments_sent_; }
  std::uint64_t retransmissions() const { return retransmissions_; }
  std::uint64_t loss_events() const { return loss_events_; }
  std::uint64_t timeouts() const { return timeouts_; }

 private:
  Segment transmit(std::uint64_t seq, double now);
  void fill_window(double now, std::vector<Segment>& out);
  void arm_timer(double now);
  void sample_rtt(double rtt);

  std::uint32_t id_;
  TcpConfig config_;
  double cwnd_;
  double ssthresh_;
  TcpState state_;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t high_sent_ = 0;
  std::optional<std::uint64_t> recover_;  // high_sent_ at the last loss response
  unsigned dupacks_ = 0;
  unsigned ai_credit_ = 0;
  std::deque<double> sent_at_;  // per outstanding segment; NaN once retransmitted
  std::optional<double> srtt_;
  double rttvar_ = 0.0;
  double rto_;
  std::optional<double> deadline_;
  std::uint64_t timer_epoch_ = 0;
  std::uint64_t segments_sent_ = 0;
  std::uint64_t retransmissions_ = 0;
  std::uint64_t loss_events_ = 0;
  std::uint64_t timeouts_ = 0;
};

class TcpReceiver {
 public:
  explicit TcpReceiver(std::uint32_t flow) : flow_(flow) {}

  /// Accepts a data segment and returns the cumulative ACK for it.
  Segment on_segment(const Segment& segment);

  std::uint64_t rcv_nxt() const { return rcv_nxt_; }
  /// Payload bytes delivered in order; each byte counted once.
  std::uint64_t delivered_bytes() const { return delivered_bytes_; }

 private:
  std::uint32_t flow_;
  std::uint64_t rcv_nxt_ = 0;
  std::uint64_t delivered_bytes_ = 0;
  std::map<std::uint64_t, std::uint16_t> out_of_order_;
};

}  // namespace tcpnc
