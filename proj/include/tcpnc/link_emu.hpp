#pragma once

// Deterministic discrete-event model of one satellite link direction: a
// drop-tail FIFO feeding a fixed-rate transmitter, a propagation delay, and
// random plus Gilbert-Elliott burst loss applied as packets leave the queue.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "tcpnc/rlnc.hpp"

namespace tcpnc {

/// Time-ordered event dispatcher. Ties run in scheduling order.
class EventQueue {
 public:
  using Action = std::function<void()>;

  void schedule(double at, Action action);
  /// Runs every event with time <= until, then sets now() to until.
  void advance(double until);

  double now() const { return now_; }
  bool empty() const { return pending_.empty(); }
  std::uint64_t dispatched() const { return dispatched_; }

 private:
  struct Event {
    double at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> pending_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  double now_ = 0.0;
};

struct GilbertElliott {
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 1.0;
  double bad_loss = 1.0;
};

struct LinkProfile {
  double bandwidth_bps = 10e6;
  double propagation_delay = 0.0;  // one way, seconds
  std::size_t queue_capacity = 1'000'000;
  double random_loss = 0.0;
  std::optional<GilbertElliott> burst;

  /// Throws ConfigError; `max_packet` is the largest frame the link must carry.
  void validate(std::size_t max_packet) const;
};

struct Frame {
  Bytes data;
  std::uint32_t wire_size = 0;  // bytes occupying the link
  std::uint32_t tag = 0;        // opaque routing tag for the caller
};

struct Delivery {
  Frame frame;
  double arrival = 0.0;
};

struct LinkCounters {
  std::uint64_t offered = 0;
  std::uint64_t tail_dropped = 0;
  std::uint64_t random_lost = 0;
  std::uint64_t burst_lost = 0;
  std::uint64_t injected_lost = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;  // accepted, not yet delivered or lost

  std::uint64_t lost() const { return tail_dropped + random_lost + burst_lost + injected_lost; }
};

enum class OfferResult { enqueued, tail_dropped };

class Link {
 public:
  using DeliveryHandler = std::function<void(Frame&&, double arrival)>;

  Link(EventQueue& events, const LinkProfile& profile, std::uint64_t seed,
       double utilization_bucket = 1.0);

  Link(const Link&) = delete;
  Link& operator=(const Link&) = delete;

  /// Without a handler, deliveries are collected and returned by advance().
  void on_delivery(DeliveryHandler handler) { handler_ = std::move(handler); }

  OfferResult offer(Frame frame);

  /// Runs the shared event queue to `until` and returns collected deliveries.
  std::vector<Delivery> advance(double until);

  /// Drops the next `length` departures at or after `start`.
  void inject_burst(double start, std::size_t length);

  /// Busy fraction of each `window`-second interval over [0, end).
  std::vector<double> utilization(double window, double end) const;
  /// Busy seconds in [from, to), rounded to bucket boundaries.
  double busy_time(double from, double to) const;

  double transmission_time(std::size_t bytes) const { return bytes * 8.0 / profile_.bandwidth_bps; }
  std::size_t queued_bytes() const { return queued_bytes_; }
  const LinkCounters& counters() const { return counters_; }
  const LinkProfile& profile() const { return profile_; }

 private:
  struct Burst {
    double start;
    std::size_t remaining;
  };

  void depart(Frame frame, double departure);
  void account_busy(double from, double to);
  bool draw(double p);

  EventQueue& events_;
  LinkProfile profile_;
  std::mt19937_64 rng_;
  double bucket_;
  DeliveryHandler handler_;
  std::vector<Delivery> collected_;
  std::vector<double> busy_;
  std::deque<Burst> bursts_;
  double busy_until_ = 0.0;
  std::size_t queued_bytes_ = 0;
  bool bad_state_ = false;
  LinkCounters counters_;
};

}  // namespace tcpnc
