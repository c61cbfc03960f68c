#include "tcpnc/tcp_model.hpp"

#include <algorithm>
#include <cmath>

namespace tcpnc {
namespace {

constexpr std::uint8_t kMarker = 0x45;
constexpr std::uint8_t kFlagAck = 0x01;
constexpr std::uint8_t kFlagRetransmission = 0x02;
constexpr double kNotTimed = std::numeric_limits<double>::quiet_NaN();

std::uint8_t pattern(const Segment& s, std::size_t i) {
  return static_cast<std::uint8_t>(s.seq * 151u + i * 13u + s.flow * 7u);
}

void put(Bytes& out, std::size_t at, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b)
    out[at + b] = static_cast<std::uint8_t>(v >> (8 * (bytes - 1 - b)));
}

std::uint64_t get(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v = (v << 8) | in[at + b];
  return v;
}

}  // namespace

Bytes encode_segment(const Segment& s) {
  Bytes out(kSegmentHeaderBytes + s.payload, 0);
  out[0] = kMarker;
  out[1] = static_cast<std::uint8_t>((s.is_ack ? kFlagAck : 0) |
                                     (s.retransmission ? kFlagRetransmission : 0));
  put(out, 2, out.size(), 2);
  put(out, 4, s.flow, 4);
  put(out, 8, s.seq, 8);
  put(out, 16, s.ack, 8);
  put(out, 24, s.payload, 2);
  for (std::size_t i = 0; i < s.payload; ++i) out[kSegmentHeaderBytes + i] = pattern(s, i);
  return out;
}

std::optional<Segment> decode_segment(std::span<const std::uint8_t> packet) {
  if (packet.size() < kSegmentHeaderBytes || packet[0] != kMarker) return std::nullopt;
  if (get(packet, 2, 2) != packet.size()) return std::nullopt;
  Segment s;
  s.is_ack = (packet[1] & kFlagAck) != 0;
  s.retransmission = (packet[1] & kFlagRetransmission) != 0;
  s.flow = static_cast<std::uint32_t>(get(packet, 4, 4));
  s.seq = get(packet, 8, 8);
  s.ack = get(packet, 16, 8);
  s.payload = static_cast<std::uint16_t>(get(packet, 24, 2));
  if (kSegmentHeaderBytes + s.payload != packet.size()) return std::nullopt;
  for (std::size_t i = 0; i < s.payload; ++i)
    if (packet[kSegmentHeaderBytes + i] != pattern(s, i)) return std::nullopt;
  return s;
}

double bdp(const LinkProfile& profile, double rtt) { return profile.bandwidth_bps * rtt / 8.0; }

TcpFlow::TcpFlow(std::uint32_t id, const TcpConfig& config)
    : id_(id),
      config_(config),
      cwnd_(std::max(1.0, config.initial_cwnd)),
      ssthresh_(config.initial_ssthresh),
      state_(cwnd_ < ssthresh_ ? TcpState::slow_start : TcpState::congestion_avoidance),
      rto_(config.initial_rto) {}

Segment TcpFlow::transmit(std::uint64_t seq, double now) {
  Segment s{id_, seq, 0, static_cast<std::uint16_t>(config_.mss), false, seq < high_sent_};
  if (s.retransmission) {
    sent_at_[seq - snd_una_] = kNotTimed;
    ++retransmissions_;
  } else {
    sent_at_.push_back(now);
    high_sent_ = seq + 1;
  }
  ++segments_sent_;
  return s;
}

void TcpFlow::arm_timer(double now) {
  deadline_ = now + rto_;
  ++timer_epoch_;
}

void TcpFlow::fill_window(double now, std::vector<Segment>& out) {
  const auto window = static_cast<std::uint64_t>(std::floor(cwnd_));
  const std::size_t before = out.size();
  while (snd_nxt_ < snd_una_ + window) {
    out.push_back(transmit(snd_nxt_, now));
    ++snd_nxt_;
  }
  if (out.size() > before && !deadline_) arm_timer(now);
}

void TcpFlow::sample_rtt(double rtt) {
  if (!srtt_) {
    srtt_ = rtt;
    rttvar_ = rtt / 2.0;
  } else {
    rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(*srtt_ - rtt);
    srtt_ = 0.875 * *srtt_ + 0.125 * rtt;
  }
  rto_ = std::clamp(*srtt_ + std::max(0.001, 4.0 * rttvar_), config_.min_rto, config_.max_rto);
}

std::vector<Segment> TcpFlow::start(double now) {
  std::vector<Segment> out;
  fill_window(now, out);
  return out;
}

std::vector<Segment> TcpFlow::on_ack(std::uint64_t ack, double now) {
  std::vector<Segment> out;
  if (ack > snd_una_) {
    ack = std::min(ack, high_sent_);
    const double sent = sent_at_[ack - 1 - snd_una_];
    if (!std::isnan(sent)) sample_rtt(now - sent);
    sent_at_.erase(sent_at_.begin(), sent_at_.begin() + static_cast<std::ptrdiff_t>(ack - snd_una_));
    snd_una_ = ack;
    snd_nxt_ = std::max(snd_nxt_, ack);
    dupacks_ = 0;

    switch (state_) {
      case TcpState::fast_recovery:
        cwnd_ = ssthresh_;
        state_ = TcpState::congestion_avoidance;
        ai_credit_ = 0;
        break;
      case TcpState::slow_start:
        cwnd_ += 1.0;
        if (cwnd_ >= ssthresh_) state_ = TcpState::congestion_avoidance;
        break;
      case TcpState::congestion_avoidance:
        // one segment per window's worth of ACKs
        if (++ai_credit_ >= static_cast<unsigned>(std::floor(cwnd_))) {
          cwnd_ += 1.0;
          ai_credit_ = 0;
        }
        break;
    }

    if (snd_nxt_ > snd_una_) {
      arm_timer(now);
    } else {
      deadline_.reset();
      ++timer_epoch_;
    }
    fill_window(now, out);
    return out;
  }

  if (snd_nxt_ == snd_una_) return out;
  ++dupacks_;
  if (state_ == TcpState::fast_recovery) {
    cwnd_ += 1.0;
    fill_window(now, out);
  } else if (dupacks_ == config_.dupack_threshold && (!recover_ || snd_una_ > *recover_)) {
    return on_loss_signal(LossSignal::triple_dupack, now);
  }
  return out;
}

std::vector<Segment> TcpFlow::on_loss_signal(LossSignal kind, double now) {
  std::vector<Segment> out;
  if (high_sent_ == snd_una_) return out;
  ++loss_events_;
  ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
  if (kind == LossSignal::triple_dupack) {
    cwnd_ = ssthresh_;
    state_ = TcpState::fast_recovery;
    recover_ = high_sent_;
    out.push_back(transmit(snd_una_, now));
    if (!deadline_) arm_timer(now);
    return out;
  }
  ++timeouts_;
  cwnd_ = 1.0;
  state_ = TcpState::slow_start;
  rto_ = std::min(rto_ * 2.0, config_.max_rto);
  snd_nxt_ = snd_una_;
  dupacks_ = 0;
  ai_credit_ = 0;
  recover_ = high_sent_;
  std::fill(sent_at_.begin(), sent_at_.end(), kNotTimed);  // Karn: no samples across a timeout
  arm_timer(now);
  fill_window(now, out);
  return out;
}

std::vector<Segment> TcpFlow::on_timer(double now) {
  if (!deadline_ || now < *deadline_) return {};
  return on_loss_signal(LossSignal::rto, now);
}

Segment TcpReceiver::on_segment(const Segment& segment) {
  if (segment.seq == rcv_nxt_) {
    delivered_bytes_ += segment.payload;
    ++rcv_nxt_;
    for (auto it = out_of_order_.begin(); it != out_of_order_.end() && it->first == rcv_nxt_;
         it = out_of_order_.erase(it)) {
      delivered_bytes_ += it->second;
      ++rcv_nxt_;
    }
  } else if (segment.seq > rcv_nxt_) {
    out_of_order_.emplace(segment.seq, segment.payload);
  }
  Segment ack;
  ack.flow = flow_;
  ack.ack = rcv_nxt_;
  ack.is_ack = true;
  return ack;
}

}  // namespace tcpnc
