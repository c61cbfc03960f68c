#pragma once

// Arithmetic in GF(2^8) with reduction polynomial x^8+x^4+x^3+x^2+1 (0x11D).
// Symbols and coding coefficients are plain bytes.

#include <cstdint>
#include <span>

namespace tcpnc::gf256 {

using Element = std::uint8_t;

inline constexpr unsigned kPolynomial = 0x11D;

constexpr Element add(Element a, Element b) noexcept {
  return static_cast<Element>(a ^ b);
}

Element mul(Element a, Element b) noexcept;

/// Multiplicative inverse. Throws CodecError for zero.
Element inv(Element a);

/// dst[k] += c * src[k] for every k. Throws CodecError on length mismatch.
void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, Element c);

/// dst[k] = c * dst[k].
void scale(std::span<std::uint8_t> dst, Element c) noexcept;

}  // namespace tcpnc::gf256
