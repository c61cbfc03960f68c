#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tcpnc/error.hpp"
#include "tcpnc/gf256.hpp"
#include "tcpnc/rlnc.hpp"

using namespace tcpnc;

namespace {

CodecConfig small(std::uint16_t n, std::uint16_t w, std::uint16_t s,
                  EmissionMode mode = EmissionMode::full_generation) {
  CodecConfig c;
  c.generation_size = n;
  c.overhead = w;
  c.symbol_size = s;
  c.mode = mode;
  return c;
}

Bytes random_packet(std::mt19937_64& rng, std::size_t max_len) {
  Bytes p(1 + rng() % max_len);
  for (auto& b : p) b = static_cast<std::uint8_t>(rng());
  return p;
}

}  // namespace

TEST_CASE("codec config validation") {
  CHECK_NOTHROW(CodecConfig{}.validate());
  CHECK_THROWS_AS(small(0, 6, 100).validate(), ConfigError);
  CHECK_THROWS_AS(small(256, 6, 100).validate(), ConfigError);
  CHECK_THROWS_AS(small(30, 256, 100).validate(), ConfigError);
  CHECK_THROWS_AS(small(30, 6, 2).validate(), ConfigError);
  CHECK_NOTHROW(small(255, 255, 3).validate());
  auto c = small(30, 6, 100);
  c.flush_timeout = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("progressive schedule") {
  SUBCASE("30+6") {
    const auto s = emission_schedule(small(30, 6, 100, EmissionMode::progressive));
    CHECK(s.size() == 36);
    std::vector<unsigned> repairs;
    for (const auto& e : s)
      if (e.kind == Emission::Kind::repair) repairs.push_back(e.after_push);
    CHECK(repairs == std::vector<unsigned>{5, 10, 15, 20, 25, 30});
    CHECK(repairs == oracle::repair_positions(30, 6));
  }
  SUBCASE("60+30") {
    const auto s = emission_schedule(small(60, 30, 100, EmissionMode::progressive));
    CHECK(s.size() == 90);
    std::vector<unsigned> repairs;
    for (const auto& e : s)
      if (e.kind == Emission::Kind::repair) repairs.push_back(e.after_push);
    CHECK(repairs == oracle::repair_positions(60, 30));
    for (std::size_t i = 0; i < repairs.size(); ++i) CHECK(repairs[i] == 2 * (i + 1));
  }
  SUBCASE("no overhead") {
    const auto s = emission_schedule(small(17, 0, 100, EmissionMode::progressive));
    CHECK(s.size() == 17);
  }
  SUBCASE("agrees with the ceiling oracle for many shapes") {
    for (unsigned n = 1; n <= 64; n += 3)
      for (unsigned w = 0; w <= 40; w += 7) {
        const auto s = emission_schedule(small(static_cast<std::uint16_t>(n),
                                               static_cast<std::uint16_t>(w), 100,
                                               EmissionMode::progressive));
        REQUIRE(s.size() == n + w);
        std::vector<unsigned> sources, repairs;
        for (const auto& e : s)
          (e.kind == Emission::Kind::source ? sources : repairs).push_back(e.after_push);
        std::vector<unsigned> expect_sources(n);
        std::iota(expect_sources.begin(), expect_sources.end(), 1u);
        REQUIRE(sources == expect_sources);
        REQUIRE(repairs == oracle::repair_positions(n, w));
        REQUIRE(std::is_sorted(s.begin(), s.end(), [](const Emission& a, const Emission& b) {
          return a.after_push < b.after_push;
        }));
      }
  }
}

TEST_CASE("full-generation schedule holds everything until the last push") {
  const auto s = emission_schedule(small(30, 6, 100));
  CHECK(s.size() == 36);
  CHECK(std::all_of(s.begin(), s.end(), [](const Emission& e) { return e.after_push == 30; }));
}

TEST_CASE("repair budget for partial generations") {
  const auto c = small(30, 6, 100);
  CHECK(repair_budget(c, 1) == 1);
  CHECK(repair_budget(c, 15) == 3);
  CHECK(repair_budget(c, 30) == 6);
  CHECK(repair_budget(small(30, 0, 100), 12) == 0);
  for (std::size_t k = 1; k <= 30; ++k)
    CHECK(repair_budget(c, k) == static_cast<std::size_t>(std::ceil(6.0 * k / 30.0)));
}

TEST_CASE("symbol layout") {
  Bytes big(1400, 0x33);
  const auto sym = make_symbol(big, 1402);
  CHECK(sym.size() == 1402);
  CHECK(sym[0] == 0x05);
  CHECK(sym[1] == 0x78);
  CHECK(std::all_of(sym.begin() + 2, sym.end(), [](std::uint8_t b) { return b == 0x33; }));

  const Bytes one{0xFF};
  CHECK(make_symbol(one, 6) == Bytes{0x00, 0x01, 0xFF, 0x00, 0x00, 0x00});
  CHECK(strip_symbol(make_symbol(one, 6)) == one);
  CHECK(strip_symbol(make_symbol(Bytes{}, 3)) == Bytes{});

  CHECK_THROWS_WITH_AS(make_symbol(Bytes(5), 6), "exceeds inner MTU", CodecError);
  CHECK_FALSE(strip_symbol(Bytes{0x00, 0x05, 1, 2, 3}).has_value());
  CHECK_FALSE(strip_symbol(Bytes{0x01}).has_value());
}

TEST_CASE("generation push and seal") {
  Generation g(7, small(30, 6, 1402));
  CHECK(g.empty());
  CHECK(g.effective_size() == 30);
  Bytes p(1400, 1);
  for (int i = 0; i < 29; ++i) g.push(p);
  CHECK_FALSE(g.sealed());
  g.push(p);
  CHECK(g.sealed());
  CHECK(g.size() == 30);
  CHECK_THROWS_AS(g.push(p), CodecError);

  Generation h(8, small(30, 6, 1402));
  CHECK_THROWS_WITH_AS(h.push(Bytes(1401)), "exceeds inner MTU", CodecError);
  CHECK(h.empty());
}

TEST_CASE("seal_partial") {
  Generation g(1, small(30, 6, 10));
  g.seal_partial();
  CHECK_FALSE(g.sealed());  // empty: no-op
  for (int i = 0; i < 15; ++i) g.push(Bytes{static_cast<std::uint8_t>(i)});
  g.seal_partial();
  CHECK(g.sealed());
  CHECK(g.effective_size() == 15);
  CHECK_THROWS_AS(g.push(Bytes{1}), CodecError);
  Rng rng(1);
  const auto cp = g.emit(rng);
  CHECK(cp.generation_size == 15);
  CHECK(cp.prefix_size() == 15);
}

TEST_CASE("emit") {
  Rng rng(3);
  Generation g(4, small(30, 6, 8));
  CHECK_THROWS_AS(g.emit(rng), CodecError);

  g.push(Bytes{0xDE, 0xAD});
  const auto one = g.emit(rng);
  REQUIRE(one.prefix_size() == 1);
  CHECK(one.coefficients[0] != 0);
  CHECK(one.generation_id == 4);
  CHECK(one.generation_size == 30);
  Bytes expect = g.symbols()[0];
  gf256::scale(expect, one.coefficients[0]);
  CHECK(one.payload == expect);

  g.push(Bytes{0xBE, 0xEF});
  const auto two = g.emit(rng);
  CHECK(two.prefix_size() == 2);
  Bytes sum(8, 0);
  for (int j = 0; j < 2; ++j)
    for (std::size_t b = 0; b < 8; ++b)
      sum[b] ^= oracle::gf_mul(two.coefficients[j], g.symbols()[j][b]);
  CHECK(two.payload == sum);
}

TEST_CASE("single-slot emissions never carry a zero coefficient") {
  Rng rng(99);
  Generation g(1, small(30, 6, 4));
  g.push(Bytes{1});
  for (int i = 0; i < 5000; ++i) REQUIRE(g.emit(rng).coefficients[0] != 0);
}

TEST_CASE("decoder basics") {
  Rng rng(5);
  SUBCASE("n=1 decodes from one packet") {
    Generation g(1, small(1, 0, 6));
    g.push(Bytes{0xAB, 0xCD});
    const auto cp = g.emit(rng);
    Decoder d(1);
    CHECK(d.push(cp) == PushStatus::decoded);
    Bytes recovered = cp.payload;
    gf256::scale(recovered, gf256::inv(cp.coefficients[0]));
    CHECK(recovered == g.symbols()[0]);
    const auto out = d.release();
    REQUIRE(out.packets.size() == 1);
    CHECK(out.packets[0] == Bytes{0xAB, 0xCD});
    CHECK(d.release().packets.empty());
  }
  SUBCASE("duplicate is redundant") {
    Generation g(2, small(4, 0, 6));
    for (int i = 0; i < 4; ++i) g.push(Bytes{static_cast<std::uint8_t>(i)});
    const auto cp = g.emit(rng);
    Decoder d(2);
    CHECK(d.push(cp) == PushStatus::innovative);
    CHECK(d.push(cp) == PushStatus::redundant);
    CHECK(d.rank() == 1);
  }
  SUBCASE("errors") {
    Generation g(3, small(4, 0, 6));
    g.push(Bytes{1});
    auto cp = g.emit(rng);
    Decoder other(9);
    CHECK_THROWS_AS(other.push(cp), CodecError);
    Decoder d(3);
    d.push(cp);
    cp.payload.push_back(0);
    CHECK_THROWS_WITH_AS(d.push(cp), "payload length mismatch", CodecError);
    cp.payload.pop_back();
    cp.coefficients.assign(5, 1);
    CHECK_THROWS_AS(d.push(cp), CodecError);  // prefix beyond generation size
  }
}

TEST_CASE("early release of a uniquely determined first slot") {
  Rng rng(8);
  Generation g(1, small(30, 6, 12));
  g.push(Bytes{'h', 'i'});
  const auto first = g.emit(rng);  // covers slot 1 only
  for (int i = 0; i < 10; ++i) g.push(Bytes{static_cast<std::uint8_t>(i)});
  Decoder d(1);
  CHECK(d.push(g.emit(rng)) == PushStatus::innovative);
  CHECK(d.release().packets.empty());
  CHECK(d.push(first) == PushStatus::innovative);
  CHECK(d.rank() < 30);
  const auto out = d.release();
  REQUIRE(out.packets.size() == 1);
  CHECK(out.packets[0] == Bytes{'h', 'i'});
  CHECK(d.released_count() == 1);
}

TEST_CASE("release stops at the first unsolved slot") {
  // Slot 2 is solved directly, slot 1 is not: nothing may go out yet.
  CodedPacket a{1, 3, {0, 1, 0}, make_symbol(Bytes{2}, 4), false};
  Bytes both = make_symbol(Bytes{9}, 4);
  gf256::axpy(both, make_symbol(Bytes{3}, 4), 1);
  CodedPacket b{1, 3, {1, 0, 1}, both, false};
  Decoder d(1);
  d.push(a);
  d.push(b);
  CHECK(d.release().packets.empty());
  CodedPacket c{1, 3, {0, 0, 1}, make_symbol(Bytes{3}, 4), false};
  CHECK(d.push(c) == PushStatus::decoded);
  const auto out = d.release();
  REQUIRE(out.packets.size() == 3);
  CHECK(out.packets[0] == Bytes{9});
  CHECK(out.packets[1] == Bytes{2});
  CHECK(out.packets[2] == Bytes{3});
}

TEST_CASE("corrupt length prefix drops the slot") {
  Decoder d(1);
  CodedPacket cp{1, 1, {1}, Bytes{0xFF, 0xFF, 0, 0}, false};
  CHECK(d.push(cp) == PushStatus::decoded);
  const auto out = d.release();
  CHECK(out.packets.empty());
  CHECK(out.corrupt == std::vector<std::size_t>{0});
  CHECK(d.release().corrupt.empty());
}

TEST_CASE("streaming decoder agrees with from-scratch elimination") {
  std::mt19937_64 pick(21);
  for (int trial = 0; trial < 400; ++trial) {
    const auto n = static_cast<std::uint16_t>(1 + pick() % 8);
    const auto s = static_cast<std::uint16_t>(3 + pick() % 2);
    const auto mode = pick() % 2 ? EmissionMode::progressive : EmissionMode::full_generation;
    const auto cfg = small(n, 4, s, mode);
    Rng rng(pick());
    Generation g(1, cfg);
    std::vector<CodedPacket> sent;
    for (const auto& e : emission_schedule(cfg)) {
      while (g.size() < e.after_push) g.push(random_packet(pick, s - 2));
      sent.push_back(g.emit(rng));
    }
    Decoder d(1);
    oracle::Matrix coeffs, payloads;
    for (const auto& cp : sent) {
      if (pick() % 3 == 0) continue;
      const auto before = d.rank();
      const auto status = d.push(cp);
      coeffs.push_back(cp.coefficients);
      payloads.push_back(cp.payload);
      oracle::Matrix m;
      for (std::size_t r = 0; r < coeffs.size(); ++r) {
        auto row = coeffs[r];
        row.resize(n, 0);
        m.push_back(row);
      }
      const auto rank = oracle::eliminate(m, n);
      REQUIRE(d.rank() == rank);
      REQUIRE(d.rank() >= before);
      REQUIRE(d.rank() <= before + 1);
      REQUIRE((status == PushStatus::redundant) == (rank == before));
      REQUIRE((status == PushStatus::decoded) == (rank == n && before < n));
    }
    const auto solved = oracle::solve(coeffs, payloads, n);
    REQUIRE(solved.has_value() == d.decoded());
    if (solved) {
      for (std::size_t j = 0; j < n; ++j) REQUIRE((*solved)[j] == g.symbols()[j]);
      const auto out = d.release();
      REQUIRE(out.packets.size() == n);
      for (std::size_t j = 0; j < n; ++j) REQUIRE(out.packets[j] == *strip_symbol(g.symbols()[j]));
    }
  }
}

TEST_CASE("round trip under loss leaving n innovative packets") {
  std::mt19937_64 pick(1234);
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = static_cast<std::uint16_t>(1 + pick() % 64);
    const auto w = static_cast<std::uint16_t>(pick() % 33);
    const auto mode = pick() % 2 ? EmissionMode::progressive : EmissionMode::full_generation;
    const auto cfg = small(n, w, 40, mode);
    Rng rng(pick());
    Generation g(static_cast<std::uint32_t>(trial), cfg);
    std::vector<Bytes> input;
    std::vector<CodedPacket> sent;
    for (const auto& e : emission_schedule(cfg)) {
      while (g.size() < e.after_push) {
        input.push_back(random_packet(pick, 38));
        g.push(input.back());
      }
      sent.push_back(g.emit(rng));
    }
    Decoder d(static_cast<std::uint32_t>(trial));
    std::vector<Bytes> output;
    const double loss = static_cast<double>(pick() % 40) / 100.0;
    for (const auto& cp : sent) {
      if (std::uniform_real_distribution<>(0, 1)(pick) < loss) continue;
      d.push(cp);
      for (auto& p : d.release().packets) output.push_back(std::move(p));
    }
    // output is always an in-order prefix of the input
    REQUIRE(output.size() <= input.size());
    for (std::size_t i = 0; i < output.size(); ++i) REQUIRE(output[i] == input[i]);
    if (d.decoded()) REQUIRE(output == input);
    REQUIRE(d.rank() <= n);
  }
}

TEST_CASE("n-1 packets never decode") {
  const auto cfg = small(30, 6, 4);
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    Generation g(1, cfg);
    for (int i = 0; i < 30; ++i) g.push(Bytes{static_cast<std::uint8_t>(i)});
    Decoder d(1);
    for (int i = 0; i < 29; ++i) REQUIRE(d.push(g.emit(rng)) != PushStatus::decoded);
    REQUIRE_FALSE(d.decoded());
    REQUIRE(d.rank() <= 29);
  }
}

TEST_CASE("decode probability with exactly n packets matches the full-rank product") {
  const auto cfg = small(30, 6, 4);
  Rng rng(2024);
  const int trials = 10000;
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    Generation g(1, cfg);
    for (int i = 0; i < 30; ++i) g.push(Bytes{static_cast<std::uint8_t>(i)});
    Decoder d(1);
    for (int i = 0; i < 30; ++i) d.push(g.emit(rng));
    ok += d.decoded();
  }
  const double expect = oracle::full_rank_probability(30);
  CHECK(expect == doctest::Approx(0.99608).epsilon(1e-4).scale(0));
  CHECK(std::abs(static_cast<double>(ok) / trials - expect) <= 0.003);
}

TEST_CASE("decoder honours the smallest announced generation size") {
  Rng rng(6);
  Generation g(1, small(30, 6, 6));
  for (int i = 0; i < 3; ++i) g.push(Bytes{static_cast<std::uint8_t>(10 + i)});
  const auto early = g.emit(rng);  // announces 30
  g.seal_partial();
  Decoder d(1);
  d.push(early);
  CHECK(d.target_size() == 30);
  while (!d.decoded()) d.push(g.emit(rng));
  CHECK(d.target_size() == 3);
  const auto out = d.release();
  CHECK(out.packets == std::vector<Bytes>{{10}, {11}, {12}});
}

TEST_CASE("a shrinking announcement can complete the generation") {
  Rng rng(8);
  Generation g(1, small(30, 6, 6));
  Decoder d(1);
  for (int i = 0; i < 3; ++i) {
    g.push(Bytes{static_cast<std::uint8_t>(i)});
    CHECK(d.push(g.emit(rng)) == PushStatus::innovative);
  }
  CHECK(d.rank() == 3);
  CHECK_FALSE(d.decoded());
  g.seal_partial();
  CHECK(d.push(g.emit(rng)) == PushStatus::decoded);
  CHECK(d.push(g.emit(rng)) == PushStatus::redundant);
}
