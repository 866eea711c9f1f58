#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdl/adversary.hpp"
#include "sdl/channel.hpp"
#include "sdl/protocol.hpp"
#include "sdl/rng.hpp"
#include "sdl/trace.hpp"

namespace sdl {

enum class ProtocolKind : uint8_t { Sdl, Abp };

inline const char* to_string(ProtocolKind p) { return p == ProtocolKind::Sdl ? "sdl" : "abp"; }

// A full starting point: both state machines, both channels, and the list of
// payloads the application will submit.
struct GlobalConfiguration {
  ProtocolKind protocol = ProtocolKind::Sdl;
  ProtocolConfig config = ProtocolConfig::standard(1);
  SenderState sender;
  ReceiverState receiver;
  Channel chan_ij{ChannelId::IJ, 1, {}};
  Channel chan_ji{ChannelId::JI, 1, {}};
  std::vector<Payload> script;

  // Throws std::invalid_argument when any component invariant is violated.
  void validate() const;
};

// Live simulation state. Everything the step engine reads or writes.
struct World {
  ProtocolKind protocol = ProtocolKind::Sdl;
  ProtocolConfig config = ProtocolConfig::standard(1);
  SenderState sender;
  ReceiverState receiver;
  Channel chan_ij{ChannelId::IJ, 1, {}};
  Channel chan_ji{ChannelId::JI, 1, {}};
  std::vector<Payload> script;
  size_t script_pos = 0;

  Channel& channel(ChannelId id) { return id == ChannelId::IJ ? chan_ij : chan_ji; }
  const Channel& channel(ChannelId id) const { return id == ChannelId::IJ ? chan_ij : chan_ji; }

  bool script_exhausted() const { return script_pos >= script.size(); }
  bool terminated() const { return script_exhausted() && sender.phase == SenderPhase::Idle; }

  bool move_enabled(const Move& m) const;
  std::vector<Move> enabled_moves() const;  // includes drops and noops
};

World make_world(const GlobalConfiguration& cfg);

// Decides overflow victims while a move is applied. Returns an index into the
// full channel, or -1 to lose the incoming packet.
using OverflowChooser = std::function<int(ChannelId, const Channel&, const Packet&)>;

struct MoveOutcome {
  std::optional<Payload> submitted;
  uint64_t submitted_step = 0;
  std::optional<DeliveryRecord> delivered_message;  // DeliverMessage (data only)
  std::optional<Payload> dropped_message;           // DropMessage (synchro)
  std::optional<Payload> delivered_ack;             // Send completed
  std::optional<PacketClass> channel_delivery;      // packet handed to an endpoint
  std::optional<OverflowChoice> overflow;           // consulted victim choice
};

// Applies one move. Pure with respect to inputs: same world + move + victim
// choices always produce the same world. `events` may be null.
MoveOutcome apply_move(World& w, const Move& m, const OverflowChooser& choose_victim,
                       std::vector<TraceEvent>* events, uint64_t* event_step);

struct RefereeStats {
  int budget = 0;
  int max_streak_ij = 0;
  int max_streak_ji = 0;
};

struct RunOutcome {
  bool terminated = false;
  bool liveness_failure = false;
  uint64_t steps_used = 0;  // logical moves applied
  std::vector<TraceEvent> trace;
  std::vector<SendRecord> send_log;  // application submissions, in order
  std::optional<SendRecord> synthetic_send;  // corrupted mid-send payload, if any
  std::vector<DeliveryRecord> delivery_log;
  std::vector<ReplayRecord> decisions;
  RefereeStats referee;
};

struct RunOptions {
  uint64_t step_limit = 1'000'000;
  int fairness_budget = 0;      // 0: default 4c
  bool referee_enabled = true;  // replays run with the referee off
  bool record_trace = true;
};

// Drives one simulation to termination or step_limit. Fully deterministic
// given (config, adversary, seed).
RunOutcome run(const GlobalConfiguration& cfg, Adversary& adversary, uint64_t seed,
               const RunOptions& opts = {});

// Samples a corrupted starting point: any sender phase, arbitrary in-range
// ack count and pending payload, arbitrary receiver queue, arbitrary channel
// contents.
GlobalConfiguration arbitrary_configuration(Rng& rng, ProtocolKind protocol, int c,
                                            const std::vector<Payload>& alphabet,
                                            std::vector<Payload> script);

GlobalConfiguration clean_configuration(ProtocolKind protocol, int c, std::vector<Payload> script);

// Payload alphabet "a", "b", ..., deterministic in n.
std::vector<Payload> default_alphabet(size_t n);

}  // namespace sdl
