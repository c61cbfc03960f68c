#pragma once

// Wire format of one coded packet inside a tunnel datagram's UDP payload.
//
//   offset size  field
//   0      1     version (0x01)
//   1      1     flags (bit0: final emission of the generation)
//   2      4     generation id, big-endian
//   6      2     generation size n', big-endian
//   8      2     symbol size S, big-endian
//   10     2     prefix size k, big-endian
//   12     k     coefficients, slot order
//   12+k   S     coded payload
//
// Inner packets travel whole inside the symbols, so the inner endpoint
// addresses are never visible on the outer path.

#include <cstddef>
#include <cstdint>
#include <span>

#include "tcpnc/rlnc.hpp"

namespace tcpnc::framing {

inline constexpr std::size_t kHeaderSize = 12;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kFlagFinal = 0x01;
/// Outer IPv4 + UDP headers.
inline constexpr std::size_t kOuterOverhead = 28;

Bytes serialize(const CodedPacket& packet);

/// Throws FramingError; never returns a partially filled packet.
CodedPacket parse(std::span<const std::uint8_t> datagram);

/// Largest inner packet that fits an outer path MTU without fragmentation.
/// Throws ConfigError when nothing fits.
std::size_t inner_mtu(std::size_t outer_path_mtu, const CodecConfig& config);

}  // namespace tcpnc::framing
