#include "tcpnc/tunnel.hpp"

#include "tcpnc/error.hpp"
#include "tcpnc/framing.hpp"

namespace tcpnc {

TunnelEndpoint::TunnelEndpoint(Role role, const CodecConfig& config, std::uint64_t seed,
                               std::size_t decode_window)
    : role_(role),
      config_(config),
      window_(decode_window),
      rng_(seed),
      schedule_(emission_schedule(config)),
      open_(0, config) {
  if (window_ == 0) throw ConfigError("decode window must hold at least one generation");
}

void TunnelEndpoint::send(std::vector<Bytes>& out, bool final_emission) {
  CodedPacket cp = open_.emit(rng_);
  cp.final_emission = final_emission;
  out.push_back(framing::serialize(cp));
  ++stats_.datagrams_sent;
}

void TunnelEndpoint::roll() {
  ++stats_.generations_sealed;
  open_ = Generation(next_id_++, config_);
  schedule_pos_ = 0;
  repairs_sent_ = 0;
}

std::vector<Bytes> TunnelEndpoint::ingress(std::span<const std::uint8_t> inner_packet, double now) {
  std::vector<Bytes> out;
  if (inner_packet.size() > inner_mtu()) {
    ++stats_.oversize_drops;
    return out;
  }
  if (open_.empty()) first_push_ = now;
  open_.push(inner_packet);
  ++stats_.inner_in;

  const std::size_t k = open_.size();
  while (schedule_pos_ < schedule_.size() && schedule_[schedule_pos_].after_push == k) {
    if (schedule_[schedule_pos_].kind == Emission::Kind::repair) ++repairs_sent_;
    ++schedule_pos_;
    send(out, schedule_pos_ == schedule_.size());
  }
  if (open_.sealed()) roll();
  return out;
}

std::vector<Bytes> TunnelEndpoint::tick(double now) {
  std::vector<Bytes> out;
  const auto deadline = flush_deadline();
  if (!deadline || now < *deadline) return out;

  const std::size_t k = open_.size();
  open_.seal_partial();
  const std::size_t budget = repair_budget(config_, k);
  std::size_t due = 0;
  if (config_.mode == EmissionMode::full_generation)
    due = k + budget;
  else  // at least one, so the far end learns the sealed size
    due = budget > repairs_sent_ ? budget - repairs_sent_ : 1;
  for (std::size_t i = 0; i < due; ++i) send(out, i + 1 == due);
  roll();
  return out;
}

std::optional<double> TunnelEndpoint::flush_deadline() const {
  if (open_.empty()) return std::nullopt;
  return first_push_ + config_.flush_timeout;
}

std::vector<Bytes> TunnelEndpoint::egress(std::span<const std::uint8_t> datagram) {
  ++stats_.datagrams_received;
  CodedPacket cp;
  try {
    cp = framing::parse(datagram);
  } catch (const FramingError&) {
    ++stats_.malformed_drops;
    return {};
  }
  const std::uint32_t id = cp.generation_id;
  if (horizon_ && id < *horizon_) {
    ++stats_.stale_drops;
    return {};
  }
  if (!decoders_.contains(id)) {
    decoders_.emplace(id, Decoder(id));
    while (decoders_.size() > window_) {
      auto oldest = decoders_.begin();
      if (!oldest->second.decoded()) ++stats_.generations_failed;
      horizon_ = oldest->first + 1;
      decoders_.erase(oldest);
    }
    if (!decoders_.contains(id)) {
      ++stats_.stale_drops;
      return {};
    }
  }
  Decoder& decoder = decoders_.at(id);
  if (decoder.decoded()) {
    ++stats_.redundant;
    return {};
  }
  const std::size_t rank = decoder.rank();
  PushStatus status;
  try {
    status = decoder.push(cp);
  } catch (const CodecError&) {
    ++stats_.malformed_drops;
    return {};
  }
  ++(decoder.rank() > rank ? stats_.innovative : stats_.redundant);
  if (status == PushStatus::redundant) return {};
  if (status == PushStatus::decoded) ++stats_.generations_decoded;

  auto released = decoder.release();
  stats_.malformed_drops += released.corrupt.size();
  stats_.inner_out += released.packets.size();
  return std::move(released.packets);
}

}  // namespace tcpnc
