#include "sdl/trace.hpp"

#include <sstream>

#include "json.hpp"

namespace sdl {

const char* to_string(Actor a) {
  switch (a) {
    case Actor::Sender: return "sender";
    case Actor::Receiver: return "receiver";
    case Actor::ChannelIJ: return "channel_ij";
    case Actor::ChannelJI: return "channel_ji";
    default: return "app";
  }
}

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::SendRequest: return "SEND_REQUEST";
    case TraceKind::PacketEmit: return "PACKET_EMIT";
    case TraceKind::PacketDeliver: return "PACKET_DELIVER";
    case TraceKind::PacketDropChannel: return "PACKET_DROP_CHANNEL";
    case TraceKind::DeliverMessage: return "DELIVER_MESSAGE";
    case TraceKind::DropMessage: return "DROP_MESSAGE";
    case TraceKind::DeliverAck: return "DELIVER_ACK";
    default: return "TIMER";
  }
}

namespace {

nlohmann::json payload_json(const Payload& p) {
  if (p.is_synchro()) return nullptr;
  return p.content;
}

}  // namespace

void write_trace_jsonl(std::ostream& os, const std::vector<TraceEvent>& trace) {
  nlohmann::json header;
  header["schema"] = kTraceSchema;
  os << header.dump() << '\n';
  for (const TraceEvent& ev : trace) {
    nlohmann::json j;
    j["step"] = ev.step;
    j["actor"] = to_string(ev.actor);
    j["kind"] = to_string(ev.kind);
    if (ev.chan) j["chan"] = to_string(*ev.chan);
    if (ev.packet) {
      j["dir"] = ev.packet->dir == PacketDir::Msg ? "MSG" : "ACK";
      j["payload"] = payload_json(ev.packet->payload);
      j["ab"] = ev.packet->ab;
    }
    if (ev.payload) j["payload"] = payload_json(*ev.payload);
    if (ev.ab) j["ab"] = *ev.ab;
    if (!ev.reason.empty()) j["reason"] = ev.reason;
    if (ev.synthetic) j["synthetic"] = true;
    os << j.dump() << '\n';
  }
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::ostringstream os;
  write_trace_jsonl(os, trace);
  return os.str();
}

}  // namespace sdl
