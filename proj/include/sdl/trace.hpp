#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdl/protocol.hpp"

namespace sdl {

inline constexpr const char* kTraceSchema = "sdlsim/trace/v1";

enum class Actor : uint8_t { Sender, Receiver, ChannelIJ, ChannelJI, App };

enum class TraceKind : uint8_t {
  SendRequest,
  PacketEmit,
  PacketDeliver,
  PacketDropChannel,
  DeliverMessage,
  DropMessage,
  DeliverAck,
  Timer,
};

const char* to_string(Actor a);
const char* to_string(TraceKind k);

struct TraceEvent {
  uint64_t step = 0;  // strictly increasing event index
  Actor actor = Actor::App;
  TraceKind kind = TraceKind::SendRequest;
  std::optional<ChannelId> chan;
  std::optional<Packet> packet;
  std::optional<Payload> payload;
  std::optional<bool> ab;
  std::string reason;       // for channel drops: "adversary" or "overflow"
  bool synthetic = false;   // send requests implied by a corrupted mid-send state

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// One event per line, preceded by a header line carrying the schema id.
void write_trace_jsonl(std::ostream& os, const std::vector<TraceEvent>& trace);
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);

struct SendRecord {
  Payload payload;
  uint64_t step = 0;
  bool synthetic = false;

  friend bool operator==(const SendRecord&, const SendRecord&) = default;
};

struct DeliveryRecord {
  Payload payload;
  bool ab = false;
  uint64_t step = 0;

  friend bool operator==(const DeliveryRecord&, const DeliveryRecord&) = default;
};

}  // namespace sdl
