#include "tcpnc/rlnc.hpp"

#include <algorithm>
#include <string>

#include "tcpnc/error.hpp"
#include "tcpnc/gf256.hpp"

namespace tcpnc {

void CodecConfig::validate() const {
  if (generation_size < 1 || generation_size > 255)
    throw ConfigError("generation size must be in 1..255, got " + std::to_string(generation_size));
  if (overhead > 255) throw ConfigError("overhead must be in 0..255, got " + std::to_string(overhead));
  if (symbol_size < 3) throw ConfigError("symbol size must be at least 3 bytes");
  if (!(flush_timeout > 0.0)) throw ConfigError("flush timeout must be positive");
}

std::vector<Emission> emission_schedule(const CodecConfig& config) {
  const unsigned n = config.generation_size;
  const unsigned w = config.overhead;
  std::vector<Emission> schedule;
  schedule.reserve(n + w);
  if (config.mode == EmissionMode::full_generation) {
    for (unsigned i = 0; i < n; ++i)
      schedule.push_back({static_cast<std::uint16_t>(n), Emission::Kind::source});
    for (unsigned i = 0; i < w; ++i)
      schedule.push_back({static_cast<std::uint16_t>(n), Emission::Kind::repair});
    return schedule;
  }
  unsigned next_repair = 1;
  for (unsigned s = 1; s <= n; ++s) {
    schedule.push_back({static_cast<std::uint16_t>(s), Emission::Kind::source});
    // repair i goes after source ceil(i*n/w)
    while (next_repair <= w && (next_repair * n + w - 1) / w == s) {
      schedule.push_back({static_cast<std::uint16_t>(s), Emission::Kind::repair});
      ++next_repair;
    }
  }
  return schedule;
}

std::size_t repair_budget(const CodecConfig& config, std::size_t k) {
  const std::size_t n = config.generation_size;
  return (config.overhead * k + n - 1) / n;
}

Bytes make_symbol(std::span<const std::uint8_t> packet, std::size_t symbol_size) {
  if (symbol_size < 2 || packet.size() > symbol_size - 2) throw CodecError("exceeds inner MTU");
  Bytes symbol(symbol_size, 0);
  symbol[0] = static_cast<std::uint8_t>(packet.size() >> 8);
  symbol[1] = static_cast<std::uint8_t>(packet.size() & 0xFF);
  std::copy(packet.begin(), packet.end(), symbol.begin() + 2);
  return symbol;
}

std::optional<Bytes> strip_symbol(std::span<const std::uint8_t> symbol) {
  if (symbol.size() < 2) return std::nullopt;
  const std::size_t len = (std::size_t{symbol[0]} << 8) | symbol[1];
  if (len > symbol.size() - 2) return std::nullopt;
  return Bytes(symbol.begin() + 2, symbol.begin() + 2 + static_cast<std::ptrdiff_t>(len));
}

Generation::Generation(std::uint32_t id, const CodecConfig& config) : id_(id), config_(config) {
  config_.validate();
  symbols_.reserve(config_.generation_size);
}

void Generation::push(std::span<const std::uint8_t> packet) {
  if (sealed_) throw CodecError("generation " + std::to_string(id_) + " is sealed");
  symbols_.push_back(make_symbol(packet, config_.symbol_size));
  if (symbols_.size() == config_.generation_size) sealed_ = true;
}

void Generation::seal_partial() {
  if (!symbols_.empty()) sealed_ = true;
}

std::uint16_t Generation::effective_size() const {
  return sealed_ ? static_cast<std::uint16_t>(symbols_.size()) : config_.generation_size;
}

CodedPacket Generation::emit(Rng& rng) const {
  if (symbols_.empty()) throw CodecError("cannot emit from an empty generation");
  const std::size_t k = symbols_.size();
  CodedPacket cp;
  cp.generation_id = id_;
  cp.generation_size = effective_size();
  cp.coefficients.resize(k);
  do {
    for (auto& c : cp.coefficients) c = static_cast<std::uint8_t>(rng() >> 56);
  } while (std::all_of(cp.coefficients.begin(), cp.coefficients.end(),
                       [](std::uint8_t c) { return c == 0; }));
  cp.payload.assign(config_.symbol_size, 0);
  for (std::size_t j = 0; j < k; ++j) gf256::axpy(cp.payload, symbols_[j], cp.coefficients[j]);
  return cp;
}

void Decoder::widen(std::size_t width) {
  if (width <= width_) return;
  width_ = width;
  pivots_.resize(width_);
  for (auto& row : pivots_)
    if (row) row->coefficients.resize(width_, 0);
}

PushStatus Decoder::push(const CodedPacket& packet) {
  if (packet.generation_id != generation_id_) throw CodecError("coded packet for another generation");
  if (symbol_size_ != 0 && packet.payload.size() != symbol_size_)
    throw CodecError("payload length mismatch");
  const std::size_t announced = packet.generation_size;
  if (announced == 0 || packet.prefix_size() == 0 || packet.prefix_size() > announced)
    throw CodecError("inconsistent coded packet");
  const std::size_t target = target_ == 0 ? announced : std::min(target_, announced);
  for (std::size_t c = target; c < width_; ++c)
    if (pivots_[c]) throw CodecError("coded packet shrinks generation below its rank");
  if (packet.prefix_size() > target) throw CodecError("inconsistent coded packet");

  const bool was_decoded = decoded();
  symbol_size_ = packet.payload.size();
  target_ = target;
  widen(packet.prefix_size());
  // a smaller announced size can complete the generation without a new row
  if (rank_ == target_) return was_decoded ? PushStatus::redundant : PushStatus::decoded;

  Row row{packet.coefficients, packet.payload};
  row.coefficients.resize(width_, 0);
  for (std::size_t c = 0; c < width_; ++c) {
    const auto f = row.coefficients[c];
    if (f == 0 || !pivots_[c]) continue;
    gf256::axpy(row.coefficients, pivots_[c]->coefficients, f);
    gf256::axpy(row.payload, pivots_[c]->payload, f);
  }
  const auto lead = std::find_if(row.coefficients.begin(), row.coefficients.end(),
                                 [](std::uint8_t c) { return c != 0; });
  if (lead == row.coefficients.end()) return PushStatus::redundant;
  const auto p = static_cast<std::size_t>(lead - row.coefficients.begin());

  const auto norm = gf256::inv(row.coefficients[p]);
  gf256::scale(row.coefficients, norm);
  gf256::scale(row.payload, norm);
  for (auto& other : pivots_) {
    if (!other) continue;
    const auto f = other->coefficients[p];
    if (f == 0) continue;
    gf256::axpy(other->coefficients, row.coefficients, f);
    gf256::axpy(other->payload, row.payload, f);
  }
  pivots_[p] = std::move(row);
  ++rank_;
  return rank_ == target_ ? PushStatus::decoded : PushStatus::innovative;
}

bool Decoder::is_unit(std::size_t slot) const {
  const auto& row = pivots_[slot];
  if (!row) return false;
  for (std::size_t c = 0; c < width_; ++c)
    if (c != slot && row->coefficients[c] != 0) return false;
  return true;
}

Decoder::Release Decoder::release() {
  // Only the leading run of solved slots goes out, so inner order survives.
  Release out;
  while (released_count_ < width_ && is_unit(released_count_)) {
    const std::size_t slot = released_count_++;
    if (auto packet = strip_symbol(pivots_[slot]->payload))
      out.packets.push_back(std::move(*packet));
    else
      out.corrupt.push_back(slot);
  }
  return out;
}

}  // namespace tcpnc
