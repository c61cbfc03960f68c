#include "tcpnc/gf256.hpp"

#include <algorithm>
#include <array>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define TCPNC_GF_SIMD 1
#endif

#include "tcpnc/error.hpp"

namespace tcpnc::gf256 {
namespace {

struct LogTables {
  std::array<Element, 512> exp{};
  std::array<int, 256> log{};
};

constexpr LogTables make_log_tables() {
  LogTables t;
  unsigned x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[i] = static_cast<Element>(x);
    t.log[x] = i;
    x <<= 1;
    if (x & 0x100) x ^= kPolynomial;
  }
  // Doubled so exp[log a + log b] needs no modular reduction.
  for (int i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  return t;
}

constexpr LogTables kLog = make_log_tables();

using MulRow = std::array<Element, 256>;

const std::array<MulRow, 256>& mul_table() {
  static const auto table = [] {
    std::array<MulRow, 256> t{};
    for (unsigned a = 1; a < 256; ++a)
      for (unsigned b = 1; b < 256; ++b)
        t[a][b] = kLog.exp[kLog.log[a] + kLog.log[b]];
    return t;
  }();
  return table;
}

// Products of c with every low nibble and every high nibble; c*x is the XOR
// of the two lookups.
struct NibbleTables {
  alignas(16) std::array<Element, 16> lo;
  alignas(16) std::array<Element, 16> hi;
};

NibbleTables nibble_tables(Element c) {
  const MulRow& row = mul_table()[c];
  NibbleTables t;
  for (unsigned i = 0; i < 16; ++i) {
    t.lo[i] = row[i];
    t.hi[i] = row[i << 4];
  }
  return t;
}

void mul_add_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t len, Element c, bool add) {
  const MulRow& row = mul_table()[c];
  if (add)
    for (std::size_t k = 0; k < len; ++k) dst[k] ^= row[src[k]];
  else
    for (std::size_t k = 0; k < len; ++k) dst[k] = row[src[k]];
}

#ifdef TCPNC_GF_SIMD
__attribute__((target("avx2"))) void mul_add_avx2(std::uint8_t* dst, const std::uint8_t* src,
                                                  std::size_t len, Element c, bool add) {
  const auto t = nibble_tables(c);
  const __m256i lo = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(t.lo.data())));
  const __m256i hi = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(t.hi.data())));
  const __m256i mask = _mm256_set1_epi8(0x0F);
  std::size_t k = 0;
  for (; k + 32 <= len; k += 32) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + k));
    __m256i p = _mm256_xor_si256(_mm256_shuffle_epi8(lo, _mm256_and_si256(x, mask)),
                                 _mm256_shuffle_epi8(hi, _mm256_and_si256(_mm256_srli_epi64(x, 4), mask)));
    auto* out = reinterpret_cast<__m256i*>(dst + k);
    if (add) p = _mm256_xor_si256(p, _mm256_loadu_si256(out));
    _mm256_storeu_si256(out, p);
  }
  mul_add_scalar(dst + k, src + k, len - k, c, add);
}

__attribute__((target("ssse3"))) void mul_add_ssse3(std::uint8_t* dst, const std::uint8_t* src,
                                                    std::size_t len, Element c, bool add) {
  const auto t = nibble_tables(c);
  const __m128i lo = _mm_load_si128(reinterpret_cast<const __m128i*>(t.lo.data()));
  const __m128i hi = _mm_load_si128(reinterpret_cast<const __m128i*>(t.hi.data()));
  const __m128i mask = _mm_set1_epi8(0x0F);
  std::size_t k = 0;
  for (; k + 16 <= len; k += 16) {
    const __m128i x = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src + k));
    __m128i p = _mm_xor_si128(_mm_shuffle_epi8(lo, _mm_and_si128(x, mask)),
                              _mm_shuffle_epi8(hi, _mm_and_si128(_mm_srli_epi64(x, 4), mask)));
    auto* out = reinterpret_cast<__m128i*>(dst + k);
    if (add) p = _mm_xor_si128(p, _mm_loadu_si128(out));
    _mm_storeu_si128(out, p);
  }
  mul_add_scalar(dst + k, src + k, len - k, c, add);
}
#endif

using MulAdd = void (*)(std::uint8_t*, const std::uint8_t*, std::size_t, Element, bool);

MulAdd pick_kernel() {
#ifdef TCPNC_GF_SIMD
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return mul_add_avx2;
  if (__builtin_cpu_supports("ssse3")) return mul_add_ssse3;
#endif
  return mul_add_scalar;
}

const MulAdd kernel = pick_kernel();

}  // namespace

Element mul(Element a, Element b) noexcept {
  if (a == 0 || b == 0) return 0;
  return kLog.exp[kLog.log[a] + kLog.log[b]];
}

Element inv(Element a) {
  if (a == 0) throw CodecError("no inverse of zero");
  return kLog.exp[255 - kLog.log[a]];
}

void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, Element c) {
  if (dst.size() != src.size()) throw CodecError("axpy: length mismatch");
  if (c == 0) return;
  const std::size_t len = dst.size();
  if (c == 1) {
    for (std::size_t k = 0; k < len; ++k) dst[k] ^= src[k];
    return;
  }
  kernel(dst.data(), src.data(), len, c, true);
}

void scale(std::span<std::uint8_t> dst, Element c) noexcept {
  if (c == 1) return;
  if (c == 0) {
    std::fill(dst.begin(), dst.end(), Element{0});
    return;
  }
  kernel(dst.data(), dst.data(), dst.size(), c, false);
}

}  // namespace tcpnc::gf256
