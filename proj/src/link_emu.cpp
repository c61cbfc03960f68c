#include "tcpnc/link_emu.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tcpnc/error.hpp"

namespace tcpnc {

void EventQueue::schedule(double at, Action action) {
  pending_.push(Event{std::max(at, now_), next_seq_++, std::move(action)});
}

void EventQueue::advance(double until) {
  while (!pending_.empty() && pending_.top().at <= until) {
    // priority_queue::top is const; the action is moved out before pop.
    Event ev = std::move(const_cast<Event&>(pending_.top()));
    pending_.pop();
    now_ = ev.at;
    ++dispatched_;
    ev.action();
  }
  now_ = std::max(now_, until);
}

void LinkProfile::validate(std::size_t max_packet) const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(bandwidth_bps > 0.0)) throw ConfigError("link bandwidth must be positive");
  if (!(propagation_delay >= 0.0)) throw ConfigError("propagation delay must be non-negative");
  if (queue_capacity < max_packet)
    throw ConfigError("queue capacity " + std::to_string(queue_capacity) +
                      " is smaller than one packet of " + std::to_string(max_packet));
  if (!in_unit(random_loss)) throw ConfigError("random loss must be a probability");
  if (burst && !(in_unit(burst->p_good_to_bad) && in_unit(burst->p_bad_to_good) &&
                 in_unit(burst->bad_loss)))
    throw ConfigError("Gilbert-Elliott parameters must be probabilities");
}

Link::Link(EventQueue& events, const LinkProfile& profile, std::uint64_t seed,
           double utilization_bucket)
    : events_(events), profile_(profile), rng_(seed), bucket_(utilization_bucket) {
  if (!(bucket_ > 0.0)) throw ConfigError("utilization bucket must be positive");
}

bool Link::draw(double p) {
  if (p <= 0.0) return false;
  // 53 random bits mapped to [0,1); identical on every platform.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u < p;
}

void Link::account_busy(double from, double to) {
  while (from < to) {
    const auto index = static_cast<std::size_t>(from / bucket_);
    if (busy_.size() <= index) busy_.resize(index + 1, 0.0);
    const double edge = std::min(to, (index + 1) * bucket_);
    busy_[index] += edge - from;
    from = edge;
  }
}

OfferResult Link::offer(Frame frame) {
  const double now = events_.now();
  ++counters_.offered;
  if (queued_bytes_ + frame.wire_size > profile_.queue_capacity) {
    ++counters_.tail_dropped;
    return OfferResult::tail_dropped;
  }
  queued_bytes_ += frame.wire_size;
  ++counters_.in_flight;
  const double start = std::max(now, busy_until_);
  const double departure = start + transmission_time(frame.wire_size);
  busy_until_ = departure;
  account_busy(start, departure);
  events_.schedule(departure, [this, f = std::move(frame), departure]() mutable {
    depart(std::move(f), departure);
  });
  return OfferResult::enqueued;
}

void Link::depart(Frame frame, double departure) {
  queued_bytes_ -= frame.wire_size;

  if (!bursts_.empty() && departure >= bursts_.front().start) {
    if (--bursts_.front().remaining == 0) bursts_.pop_front();
    ++counters_.injected_lost;
    --counters_.in_flight;
    return;
  }
  if (profile_.burst) {
    const auto& ge = *profile_.burst;
    bad_state_ = bad_state_ ? !draw(ge.p_bad_to_good) : draw(ge.p_good_to_bad);
    if (bad_state_ && draw(ge.bad_loss)) {
      ++counters_.burst_lost;
      --counters_.in_flight;
      return;
    }
  }
  if (draw(profile_.random_loss)) {
    ++counters_.random_lost;
    --counters_.in_flight;
    return;
  }
  const double arrival = departure + profile_.propagation_delay;
  events_.schedule(arrival, [this, f = std::move(frame), arrival]() mutable {
    ++counters_.delivered;
    --counters_.in_flight;
    if (handler_)
      handler_(std::move(f), arrival);
    else
      collected_.push_back(Delivery{std::move(f), arrival});
  });
}

std::vector<Delivery> Link::advance(double until) {
  events_.advance(until);
  return std::exchange(collected_, {});
}

void Link::inject_burst(double start, std::size_t length) {
  if (length == 0) throw ConfigError("burst length must be at least one packet");
  bursts_.push_back(Burst{start, length});
  std::stable_sort(bursts_.begin(), bursts_.end(),
                   [](const Burst& a, const Burst& b) { return a.start < b.start; });
}

double Link::busy_time(double from, double to) const {
  double total = 0.0;
  const auto first = static_cast<std::size_t>(std::llround(from / bucket_));
  const auto last = static_cast<std::size_t>(std::llround(to / bucket_));
  for (std::size_t i = first; i < last && i < busy_.size(); ++i) total += busy_[i];
  return total;
}

std::vector<double> Link::utilization(double window, double end) const {
  const double ratio = window / bucket_;
  if (!(window > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ConfigError("utilization window must be a multiple of the bucket width");
  std::vector<double> out;
  const auto windows = static_cast<std::size_t>(std::floor(end / window + 1e-9));
  for (std::size_t i = 0; i < windows; ++i)
    out.push_back(std::clamp(busy_time(i * window, (i + 1) * window) / window, 0.0, 1.0));
  return out;
}

}  // namespace tcpnc
