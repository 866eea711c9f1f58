#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sdl {

enum class PayloadKind : uint8_t { Data, Synchro };

// A message as seen by the application layer. SYNCHRO payloads carry no
// content and never reach the application.
struct Payload {
  PayloadKind kind = PayloadKind::Synchro;
  std::string content;

  static Payload data(std::string s) { return Payload{PayloadKind::Data, std::move(s)}; }
  static Payload synchro() { return Payload{}; }

  bool is_synchro() const { return kind == PayloadKind::Synchro; }
  bool is_data() const { return kind == PayloadKind::Data; }

  friend bool operator==(const Payload&, const Payload&) = default;
  friend auto operator<=>(const Payload&, const Payload&) = default;
};

enum class PacketDir : uint8_t { Msg, Ack };

// What travels on a virtual channel. An Ack echoes the payload and bit of
// the packet it acknowledges.
struct Packet {
  PacketDir dir = PacketDir::Msg;
  Payload payload;
  bool ab = false;

  friend bool operator==(const Packet&, const Packet&) = default;
  friend auto operator<=>(const Packet&, const Packet&) = default;
};

enum class ChannelId : uint8_t { IJ, JI };  // IJ: sender->receiver, JI: acks back

inline const char* to_string(ChannelId id) { return id == ChannelId::IJ ? "ij" : "ji"; }

struct ProtocolConfig {
  int c = 1;              // channel capacity in packets
  int ack_threshold = 5;  // 3c+2
  int copy_threshold = 2; // c+1

  static ProtocolConfig standard(int c);
  // Test hook: same shape with a deliberately wrong ack threshold.
  static ProtocolConfig with_ack_threshold(int c, int ack_threshold);
  bool is_standard() const { return ack_threshold == 3 * c + 2 && copy_threshold == c + 1; }
};

enum class SenderPhase : uint8_t { Idle, SyncPhase, DataPhase };

inline const char* to_string(SenderPhase p) {
  switch (p) {
    case SenderPhase::Idle: return "IDLE";
    case SenderPhase::SyncPhase: return "SYNC";
    default: return "DATA";
  }
}

struct SenderState {
  bool ab = false;
  SenderPhase phase = SenderPhase::Idle;
  Payload pending;    // meaningful when phase != Idle
  int ack_count = 0;  // in [0, ack_threshold) when phase != Idle

  friend bool operator==(const SenderState&, const SenderState&) = default;
};

struct QueueEntry {
  Payload payload;
  bool ab = false;
  int count = 0;

  friend bool operator==(const QueueEntry&, const QueueEntry&) = default;
};

// Recency list, head first. Holds at most c+1 entries; bumping an entry
// moves it to the head, inserting into a full queue evicts the tail.
struct ReceiverQueue {
  std::vector<QueueEntry> entries;

  friend bool operator==(const ReceiverQueue&, const ReceiverQueue&) = default;
};

// Returns the updated queue and the post-bump count for (m, ab).
std::pair<ReceiverQueue, int> q_bump(ReceiverQueue q, const Payload& m, bool ab, int c);

struct ReceiverState {
  bool last_delivered = false;
  ReceiverQueue queue;

  friend bool operator==(const ReceiverState&, const ReceiverState&) = default;
};

// Protocol actions. Transitions emit these; the harness interprets them.
struct EmitPacket {
  ChannelId chan;
  Packet packet;
};
struct DeliverMessage {
  Payload payload;
  bool ab;
};
struct DropMessage {
  Payload payload;
  bool ab;
};
struct DeliverAck {
  Payload payload;
};
struct ArmResendTimer {};

using Action = std::variant<EmitPacket, DeliverMessage, DropMessage, DeliverAck, ArmResendTimer>;

struct SenderResult {
  SenderState state;
  std::vector<Action> actions;
};

struct ReceiverResult {
  ReceiverState state;
  std::vector<Action> actions;
};

// Validates field ranges; echoes `initial` when given, else a clean idle state.
// Throws std::invalid_argument on out-of-range fields.
SenderState sender_init(const ProtocolConfig& cfg, const std::optional<SenderState>& initial = {});
ReceiverState receiver_init(const ProtocolConfig& cfg, const std::optional<ReceiverState>& initial = {});

// Send(m): flip the bit and start the SYNCHRO round. Only legal when idle.
SenderResult sender_on_send_request(const SenderState& s, const Payload& m, const ProtocolConfig& cfg);
// Periodic resend of the current packet. Stale timers in Idle do nothing.
SenderResult sender_on_timer(const SenderState& s, const ProtocolConfig& cfg);
// Count matching acks; at 3c+2 move SYNC->DATA (bit flipped) or DATA->done.
SenderResult sender_on_packet(const SenderState& s, const Packet& pkt, const ProtocolConfig& cfg);

// Receive(m, ab): bump the queue, deliver/drop on the c+1-th copy when the
// bit differs from last_delivered, reset the queue on any crossing, always ack.
ReceiverResult receiver_on_packet(const ReceiverState& s, const Packet& pkt, const ProtocolConfig& cfg);

// Classical alternating-bit baseline over the same vocabulary. The sender
// resends (m, ab) until one matching ack; the receiver delivers on the first
// receipt whose bit differs from last_delivered and acks every packet.
SenderState abp_sender_init(const std::optional<SenderState>& initial = {});
SenderResult abp_sender_on_send_request(const SenderState& s, const Payload& m);
SenderResult abp_sender_on_timer(const SenderState& s);
SenderResult abp_sender_on_packet(const SenderState& s, const Packet& pkt);
ReceiverResult abp_receiver_on_packet(const ReceiverState& s, const Packet& pkt);

}  // namespace sdl
