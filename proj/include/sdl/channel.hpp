#pragma once

#include <map>
#include <vector>

#include "sdl/protocol.hpp"
#include "sdl/rng.hpp"

namespace sdl {

// A c-bounded, non-FIFO multiset of in-flight packets. Vector order is
// insertion order; delivery order is whatever the adversary picks.
struct Channel {
  ChannelId id = ChannelId::IJ;
  int capacity = 1;
  std::vector<Packet> in_flight;

  bool full() const { return static_cast<int>(in_flight.size()) >= capacity; }
  bool empty() const { return in_flight.empty(); }

  friend bool operator==(const Channel&, const Channel&) = default;
};

// Fairness is tracked per packet class: the same (direction, payload, bit)
// resent over and over must not be denied forever.
struct PacketClass {
  PacketDir dir = PacketDir::Msg;
  Payload payload;
  bool ab = false;

  friend bool operator==(const PacketClass&, const PacketClass&) = default;
  friend auto operator<=>(const PacketClass&, const PacketClass&) = default;
};

inline PacketClass class_of(const Packet& p) { return PacketClass{p.dir, p.payload, p.ab}; }

struct ChannelSendOutcome {
  bool stored = false;        // packet is now in flight
  bool overflow = false;      // channel was full
  int victim_index = -1;      // -1: the incoming packet was the victim
  Packet lost;                // meaningful when overflow
};

// Adds pkt if there is room. On overflow the caller-chosen victim
// (an index into in_flight, or -1 for the incoming packet) is lost.
ChannelSendOutcome channel_send(Channel& ch, const Packet& pkt, int victim_index);

// Removes and returns the packet at `index`.
Packet channel_take(Channel& ch, int index);

// Initial contents of a channel in an arbitrary configuration: up to c
// packets of any direction, any alphabet-or-SYNCHRO payload, any bit.
Channel channel_init_arbitrary(Rng& rng, ChannelId id, int c, const std::vector<Payload>& alphabet);

// Referee state for one channel. The adversary may deny (defer or drop) a
// packet class at most `budget` consecutive times; after that the harness
// forces a delivery of that class.
class FairnessReferee {
 public:
  explicit FairnessReferee(int budget) : budget_(budget) {}

  int budget() const { return budget_; }

  // Index of a packet whose class has exhausted its budget, or -1.
  int forced_delivery_index(const Channel& ch) const;

  // Call after a step on `ch` resolved: `delivered` is the class removed by
  // a delivery this step, if any. Every other class present at the start of
  // the step was deferred once more.
  void note_step(const std::vector<PacketClass>& present_at_start,
                 const PacketClass* delivered);

  // A send overflow that lost a packet of `cls` counts as a denial.
  void note_overflow_loss(const PacketClass& cls);

  // True if the victim choice must be overridden to protect `incoming`'s
  // class; in that case the referee victimizes an in-flight packet of a
  // different class instead.
  int override_overflow_victim(const Channel& ch, const Packet& incoming, int victim_index) const;

  int max_streak_seen() const { return max_streak_; }

 private:
  int budget_;
  int max_streak_ = 0;
  std::map<PacketClass, int> denials_;
};

}  // namespace sdl
