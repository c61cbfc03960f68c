#include "tcpnc/framing.hpp"

#include <algorithm>
#include <string>

#include "tcpnc/error.hpp"

namespace tcpnc::framing {
namespace {

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

[[noreturn]] void malformed(const std::string& why) {
  throw FramingError(FramingError::Code::malformed_datagram, "malformed datagram: " + why);
}

}  // namespace

Bytes serialize(const CodedPacket& packet) {
  Bytes out;
  out.reserve(kHeaderSize + packet.coefficients.size() + packet.payload.size());
  out.push_back(kVersion);
  out.push_back(packet.final_emission ? kFlagFinal : 0);
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(packet.generation_id >> shift));
  put16(out, packet.generation_size);
  put16(out, static_cast<std::uint16_t>(packet.payload.size()));
  put16(out, static_cast<std::uint16_t>(packet.coefficients.size()));
  out.insert(out.end(), packet.coefficients.begin(), packet.coefficients.end());
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

CodedPacket parse(std::span<const std::uint8_t> datagram) {
  if (datagram.size() < kHeaderSize) malformed("shorter than header");
  if (datagram[0] != kVersion)
    throw FramingError(FramingError::Code::unsupported_version,
                       "unsupported version " + std::to_string(datagram[0]));
  CodedPacket cp;
  cp.final_emission = (datagram[1] & kFlagFinal) != 0;
  cp.generation_id = (std::uint32_t{datagram[2]} << 24) | (std::uint32_t{datagram[3]} << 16) |
                     (std::uint32_t{datagram[4]} << 8) | datagram[5];
  cp.generation_size = get16(datagram, 6);
  const std::size_t symbol_size = get16(datagram, 8);
  const std::size_t prefix = get16(datagram, 10);
  if (cp.generation_size == 0) malformed("zero generation size");
  if (prefix == 0 || prefix > cp.generation_size) malformed("prefix size out of range");
  if (symbol_size < 3) malformed("symbol size below 3");
  if (datagram.size() != kHeaderSize + prefix + symbol_size) malformed("length mismatch");
  const auto coeffs = datagram.subspan(kHeaderSize, prefix);
  if (std::all_of(coeffs.begin(), coeffs.end(), [](std::uint8_t c) { return c == 0; }))
    malformed("all-zero coefficients");
  cp.coefficients.assign(coeffs.begin(), coeffs.end());
  const auto payload = datagram.subspan(kHeaderSize + prefix);
  cp.payload.assign(payload.begin(), payload.end());
  return cp;
}

std::size_t inner_mtu(std::size_t outer_path_mtu, const CodecConfig& config) {
  const std::size_t reserved = kOuterOverhead + kHeaderSize + config.generation_size + 2;
  if (outer_path_mtu <= reserved)
    throw ConfigError("path MTU " + std::to_string(outer_path_mtu) +
                      " leaves no room for inner packets with n=" +
                      std::to_string(config.generation_size));
  return outer_path_mtu - reserved;
}

}  // namespace tcpnc::framing
