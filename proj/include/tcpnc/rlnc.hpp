#pragma once

// Generation-based random linear network coding.
//
// Each coded packet carries r = sum_j c_j * p_j over GF(2^8) together with the
// coefficient vector c. Source packets are stored as fixed-size symbols: a
// 2-byte big-endian length prefix, the packet bytes, then zero padding.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace tcpnc {

using Bytes = std::vector<std::uint8_t>;
using Rng = std::mt19937_64;

enum class EmissionMode {
  /// One coded packet over the available prefix after every source push,
  /// plus repairs spread evenly through the generation.
  progressive,
  /// Nothing is sent until the generation is sealed; then n'+repairs dense
  /// coded packets go out back to back.
  full_generation,
};

struct CodecConfig {
  std::uint16_t generation_size = 30;
  std::uint16_t overhead = 6;
  std::uint16_t symbol_size = 1430;
  double flush_timeout = 0.05;  // virtual seconds
  EmissionMode mode = EmissionMode::progressive;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  std::size_t max_packet_size() const { return symbol_size - 2u; }
};

struct CodedPacket {
  std::uint32_t generation_id = 0;
  std::uint16_t generation_size = 0;  // as sealed; the configured n before that
  Bytes coefficients;                 // prefix_size = coefficients.size()
  Bytes payload;                      // exactly symbol_size bytes
  bool final_emission = false;

  std::size_t prefix_size() const { return coefficients.size(); }

  bool operator==(const CodedPacket&) const = default;
};

/// Emission index k means "emit after the k-th source push" (1-based).
struct Emission {
  enum class Kind : std::uint8_t { source, repair };
  std::uint16_t after_push;
  Kind kind;

  bool operator==(const Emission&) const = default;
};

/// Deterministic per-generation schedule of n+w emissions.
std::vector<Emission> emission_schedule(const CodecConfig& config);

/// Number of repair emissions a generation sealed with `k` symbols is owed.
std::size_t repair_budget(const CodecConfig& config, std::size_t k);

class Generation {
 public:
  Generation(std::uint32_t id, const CodecConfig& config);

  /// Stores `packet` as the next symbol. Seals the generation when it fills.
  void push(std::span<const std::uint8_t> packet);

  /// Seals a partially filled generation at its current size. No-op when empty.
  void seal_partial();

  /// Draws a random coded packet over the symbols pushed so far.
  CodedPacket emit(Rng& rng) const;

  std::uint32_t id() const { return id_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  bool sealed() const { return sealed_; }
  std::size_t capacity() const { return config_.generation_size; }
  /// n' once sealed, the configured n before that.
  std::uint16_t effective_size() const;
  const std::vector<Bytes>& symbols() const { return symbols_; }

 private:
  std::uint32_t id_;
  CodecConfig config_;
  std::vector<Bytes> symbols_;
  bool sealed_ = false;
};

/// Pads `packet` into a symbol of `symbol_size` bytes.
Bytes make_symbol(std::span<const std::uint8_t> packet, std::size_t symbol_size);

/// Inverse of make_symbol; nullopt when the length prefix is corrupt.
std::optional<Bytes> strip_symbol(std::span<const std::uint8_t> symbol);

enum class PushStatus { innovative, redundant, decoded };

/// Streaming decoder for one generation. Received rows are kept in reduced
/// row-echelon form so every pivot column holds a single 1.
class Decoder {
 public:
  explicit Decoder(std::uint32_t generation_id) : generation_id_(generation_id) {}

  /// Returns decoded exactly once, on the push that completes the generation.
  PushStatus push(const CodedPacket& packet);

  struct Release {
    std::vector<Bytes> packets;         // in slot order
    std::vector<std::size_t> corrupt;   // slots dropped for a bad length prefix
  };

  /// Emits the leading run of solved slots not yet released.
  Release release();

  std::uint32_t generation_id() const { return generation_id_; }
  std::size_t rank() const { return rank_; }
  /// Smallest generation size announced so far; 0 before the first packet.
  std::size_t target_size() const { return target_; }
  bool decoded() const { return target_ != 0 && rank_ == target_; }
  std::size_t released_count() const { return released_count_; }

 private:
  struct Row {
    Bytes coefficients;
    Bytes payload;
  };

  bool is_unit(std::size_t slot) const;
  void widen(std::size_t width);

  std::uint32_t generation_id_;
  std::size_t symbol_size_ = 0;
  std::size_t width_ = 0;
  std::size_t target_ = 0;
  std::size_t rank_ = 0;
  std::size_t released_count_ = 0;
  std::vector<std::optional<Row>> pivots_;
};

}  // namespace tcpnc
