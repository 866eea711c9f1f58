#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdl/channel.hpp"
#include "sdl/protocol.hpp"
#include "sdl/rng.hpp"

namespace sdl {

struct World;

// One scheduler move. A single logical step applies exactly one of these.
struct MoveDeliver {
  ChannelId chan;
  int index;
  friend bool operator==(const MoveDeliver&, const MoveDeliver&) = default;
};
struct MoveDrop {
  ChannelId chan;
  int index;
  friend bool operator==(const MoveDrop&, const MoveDrop&) = default;
};
struct MoveNoop {
  ChannelId chan;
  friend bool operator==(const MoveNoop&, const MoveNoop&) = default;
};
struct MoveTimer {
  friend bool operator==(const MoveTimer&, const MoveTimer&) = default;
};
struct MoveSubmit {
  friend bool operator==(const MoveSubmit&, const MoveSubmit&) = default;
};

using Move = std::variant<MoveDeliver, MoveDrop, MoveNoop, MoveTimer, MoveSubmit>;

// Replay streams interleave moves with overflow-victim choices in the order
// they were consumed.
struct OverflowChoice {
  ChannelId chan;
  int victim;  // index into in_flight, or -1 for the incoming packet
  friend bool operator==(const OverflowChoice&, const OverflowChoice&) = default;
};

using ReplayRecord = std::variant<Move, OverflowChoice>;

std::string to_string(const Move& m);

// Adversary strategies control both delivery scheduling and overflow victims.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string name() const = 0;
  virtual Move choose_move(const World& w, Rng& rng) = 0;
  virtual int choose_overflow_victim(const World& w, ChannelId chan, const Packet& incoming,
                                     Rng& rng) = 0;
};

// Uniform over enabled moves; drops an in-flight packet with probability p_drop.
std::unique_ptr<Adversary> make_random_adversary(double p_drop);
// Always delivers the newest in-flight packet; overflow victimizes the oldest.
std::unique_ptr<Adversary> make_lifo_adversary();
// Defers one packet class as long as the fairness budget allows, delivering
// everything else around it.
std::unique_ptr<Adversary> make_hold_and_flood_adversary();
// Deterministic drain: oldest packet of (i,j) first, then (j,i), then timer,
// then app. Used to record witness replays.
std::unique_ptr<Adversary> make_eager_adversary();
// Replays a recorded decision stream verbatim.
std::unique_ptr<Adversary> make_replay_adversary(std::vector<ReplayRecord> records);

struct StrategySpec {
  std::string kind = "random";  // random | lifo | hold-and-flood | eager
  double p_drop = 0.25;
};

std::unique_ptr<Adversary> make_adversary(const StrategySpec& spec);

}  // namespace sdl
