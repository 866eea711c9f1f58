#include "sdl/adversary.hpp"

#include <stdexcept>

#include "sdl/harness.hpp"

namespace sdl {

std::string to_string(const Move& m) {
  if (const auto* d = std::get_if<MoveDeliver>(&m))
    return std::string("deliver ") + to_string(d->chan) + "[" + std::to_string(d->index) + "]";
  if (const auto* d = std::get_if<MoveDrop>(&m))
    return std::string("drop ") + to_string(d->chan) + "[" + std::to_string(d->index) + "]";
  if (const auto* n = std::get_if<MoveNoop>(&m)) return std::string("noop ") + to_string(n->chan);
  if (std::holds_alternative<MoveTimer>(m)) return "timer";
  return "submit";
}

namespace {

int in_flight_total(const World& w) {
  return static_cast<int>(w.chan_ij.in_flight.size() + w.chan_ji.in_flight.size());
}

// Packet index n across (i,j) then (j,i).
MoveDeliver nth_packet_deliver(const World& w, int n) {
  const int ij = static_cast<int>(w.chan_ij.in_flight.size());
  if (n < ij) return MoveDeliver{ChannelId::IJ, n};
  return MoveDeliver{ChannelId::JI, n - ij};
}

class RandomAdversary final : public Adversary {
 public:
  explicit RandomAdversary(double p_drop) : p_drop_(p_drop) {}

  std::string name() const override { return "random"; }

  Move choose_move(const World& w, Rng& rng) override {
    const int packets = in_flight_total(w);
    if (packets > 0 && rng.chance(p_drop_)) {
      const int n = static_cast<int>(rng.uniform(packets));
      MoveDeliver d = nth_packet_deliver(w, n);
      return MoveDrop{d.chan, d.index};
    }
    // One slot per deliverable packet, plus timer and app submission.
    std::vector<Move> options;
    for (int n = 0; n < packets; ++n) options.push_back(nth_packet_deliver(w, n));
    if (w.sender.phase != SenderPhase::Idle) options.push_back(MoveTimer{});
    if (w.sender.phase == SenderPhase::Idle && !w.script_exhausted())
      options.push_back(MoveSubmit{});
    if (options.empty()) throw std::logic_error("no enabled moves outside termination");
    return options[rng.uniform(options.size())];
  }

  int choose_overflow_victim(const World& w, ChannelId chan, const Packet&, Rng& rng) override {
    // Uniform over the incoming packet (-1) and every in-flight slot.
    const Channel& ch = w.channel(chan);
    const uint64_t r = rng.uniform(ch.in_flight.size() + 1);
    return r == ch.in_flight.size() ? -1 : static_cast<int>(r);
  }

 private:
  double p_drop_;
};

class LifoAdversary final : public Adversary {
 public:
  std::string name() const override { return "lifo"; }

  Move choose_move(const World& w, Rng&) override {
    // Newest packet first: maximal reordering pressure.
    if (!w.chan_ij.empty() || !w.chan_ji.empty()) {
      if (w.chan_ij.in_flight.size() >= w.chan_ji.in_flight.size() && !w.chan_ij.empty())
        return MoveDeliver{ChannelId::IJ, static_cast<int>(w.chan_ij.in_flight.size()) - 1};
      return MoveDeliver{ChannelId::JI, static_cast<int>(w.chan_ji.in_flight.size()) - 1};
    }
    if (w.sender.phase != SenderPhase::Idle) return MoveTimer{};
    return MoveSubmit{};
  }

  int choose_overflow_victim(const World&, ChannelId, const Packet&, Rng&) override {
    return 0;  // evict the oldest, keep the newest
  }
};

class HoldAndFloodAdversary final : public Adversary {
 public:
  std::string name() const override { return "hold-and-flood"; }

  Move choose_move(const World& w, Rng&) override {
    if (!held_ && !w.chan_ij.empty()) held_ = class_of(w.chan_ij.in_flight.front());
    // Deliver anything that is not the held class; otherwise stall the held
    // packets until the referee forces them through.
    for (ChannelId id : {ChannelId::IJ, ChannelId::JI}) {
      const Channel& ch = w.channel(id);
      for (int i = static_cast<int>(ch.in_flight.size()) - 1; i >= 0; --i)
        if (!held_ || !(class_of(ch.in_flight[i]) == *held_)) return MoveDeliver{id, i};
    }
    if (w.sender.phase != SenderPhase::Idle) return MoveTimer{};
    if (w.sender.phase == SenderPhase::Idle && !w.script_exhausted()) return MoveSubmit{};
    // Only held packets remain: defer.
    if (!w.chan_ij.empty()) return MoveNoop{ChannelId::IJ};
    return MoveNoop{ChannelId::JI};
  }

  int choose_overflow_victim(const World&, ChannelId, const Packet& incoming, Rng&) override {
    if (held_ && class_of(incoming) == *held_) return -1;  // starve the held class
    return 0;
  }

 private:
  std::optional<PacketClass> held_;
};

class EagerAdversary final : public Adversary {
 public:
  std::string name() const override { return "eager"; }

  Move choose_move(const World& w, Rng&) override {
    if (!w.chan_ij.empty()) return MoveDeliver{ChannelId::IJ, 0};
    if (!w.chan_ji.empty()) return MoveDeliver{ChannelId::JI, 0};
    if (w.sender.phase != SenderPhase::Idle) return MoveTimer{};
    return MoveSubmit{};
  }

  int choose_overflow_victim(const World&, ChannelId, const Packet&, Rng&) override {
    return -1;
  }
};

class ReplayAdversary final : public Adversary {
 public:
  explicit ReplayAdversary(std::vector<ReplayRecord> records) : records_(std::move(records)) {}

  std::string name() const override { return "replay"; }

  Move choose_move(const World&, Rng&) override {
    const ReplayRecord& rec = next("move");
    const Move* m = std::get_if<Move>(&rec);
    if (!m) throw std::runtime_error("replay stream: expected a move, found an overflow choice");
    return *m;
  }

  int choose_overflow_victim(const World&, ChannelId chan, const Packet&, Rng&) override {
    const ReplayRecord& rec = next("overflow choice");
    const OverflowChoice* c = std::get_if<OverflowChoice>(&rec);
    if (!c) throw std::runtime_error("replay stream: expected an overflow choice, found a move");
    if (c->chan != chan) throw std::runtime_error("replay stream: overflow choice channel mismatch");
    return c->victim;
  }

 private:
  const ReplayRecord& next(const char* what) {
    if (pos_ >= records_.size())
      throw std::runtime_error(std::string("replay stream exhausted; needed a ") + what);
    return records_[pos_++];
  }

  std::vector<ReplayRecord> records_;
  size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<Adversary> make_random_adversary(double p_drop) {
  return std::make_unique<RandomAdversary>(p_drop);
}
std::unique_ptr<Adversary> make_lifo_adversary() { return std::make_unique<LifoAdversary>(); }
std::unique_ptr<Adversary> make_hold_and_flood_adversary() {
  return std::make_unique<HoldAndFloodAdversary>();
}
std::unique_ptr<Adversary> make_eager_adversary() { return std::make_unique<EagerAdversary>(); }
std::unique_ptr<Adversary> make_replay_adversary(std::vector<ReplayRecord> records) {
  return std::make_unique<ReplayAdversary>(std::move(records));
}

std::unique_ptr<Adversary> make_adversary(const StrategySpec& spec) {
  if (spec.kind == "random") return make_random_adversary(spec.p_drop);
  if (spec.kind == "lifo") return make_lifo_adversary();
  if (spec.kind == "hold-and-flood") return make_hold_and_flood_adversary();
  if (spec.kind == "eager") return make_eager_adversary();
  throw std::invalid_argument("unknown adversary strategy: " + spec.kind);
}

}  // namespace sdl
