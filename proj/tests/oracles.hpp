#pragma once

// Slow reference implementations the production code is checked against.
// None of these share code with the library.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

// Carry-less multiply, then reduce modulo x^8+x^4+x^3+x^2+1.
inline std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  unsigned product = 0;
  for (int bit = 0; bit < 8; ++bit)
    if (b & (1u << bit)) product ^= unsigned{a} << bit;
  for (int bit = 15; bit >= 8; --bit)
    if (product & (1u << bit)) product ^= 0x11Du << (bit - 8);
  return static_cast<std::uint8_t>(product);
}

inline std::uint8_t gf_inv(std::uint8_t a) {
  for (unsigned b = 1; b < 256; ++b)
    if (gf_mul(a, static_cast<std::uint8_t>(b)) == 1) return static_cast<std::uint8_t>(b);
  return 0;
}

using Matrix = std::vector<std::vector<std::uint8_t>>;

// Gauss-Jordan over GF(2^8) on an augmented matrix [A | B]. Returns the rank
// of A and leaves the reduced matrix in place.
inline std::size_t eliminate(Matrix& m, std::size_t columns) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < columns && rank < m.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[rank], m[pivot]);
    const auto scale = gf_inv(m[rank][col]);
    for (auto& v : m[rank]) v = gf_mul(v, scale);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const auto f = m[r][col];
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] ^= gf_mul(f, m[rank][c]);
    }
    ++rank;
  }
  return rank;
}

// Solves the received system from scratch. Returns the n source symbols when
// the coefficient matrix has full column rank n.
inline std::optional<Matrix> solve(const Matrix& coefficients, const Matrix& payloads,
                                   std::size_t n) {
  Matrix m;
  for (std::size_t r = 0; r < coefficients.size(); ++r) {
    std::vector<std::uint8_t> row(coefficients[r]);
    row.resize(n, 0);
    row.insert(row.end(), payloads[r].begin(), payloads[r].end());
    m.push_back(std::move(row));
  }
  if (eliminate(m, n) < n) return std::nullopt;
  Matrix out;
  for (std::size_t r = 0; r < n; ++r) out.emplace_back(m[r].begin() + static_cast<long>(n), m[r].end());
  return out;
}

// Probability that n uniformly random rows of length n over GF(256) are
// linearly independent.
inline double full_rank_probability(unsigned n) {
  double p = 1.0;
  for (unsigned k = 1; k <= n; ++k) p *= 1.0 - std::pow(256.0, -static_cast<double>(k));
  return p;
}

// Repair i (1-based) follows source push ceil(i*n/w).
inline std::vector<unsigned> repair_positions(unsigned n, unsigned w) {
  std::vector<unsigned> out;
  for (unsigned i = 1; i <= w; ++i)
    out.push_back(static_cast<unsigned>(std::ceil(static_cast<double>(i) * n / w)));
  return out;
}

}  // namespace oracle
