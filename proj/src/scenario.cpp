#include "sdl/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sdl {

namespace {

using nlohmann::json;

json payload_to_json(const Payload& p) {
  if (p.is_synchro()) return nullptr;
  return p.content;
}

Payload payload_from_json(const json& j) {
  if (j.is_null()) return Payload::synchro();
  if (!j.is_string()) throw std::invalid_argument("payload must be a string or null");
  return Payload::data(j.get<std::string>());
}

json packet_to_json(const Packet& p) {
  json j;
  j["dir"] = p.dir == PacketDir::Msg ? "MSG" : "ACK";
  j["payload"] = payload_to_json(p.payload);
  j["ab"] = p.ab;
  return j;
}

Packet packet_from_json(const json& j) {
  Packet p;
  const std::string dir = j.at("dir").get<std::string>();
  if (dir == "MSG")
    p.dir = PacketDir::Msg;
  else if (dir == "ACK")
    p.dir = PacketDir::Ack;
  else
    throw std::invalid_argument("packet dir must be MSG or ACK");
  p.payload = payload_from_json(j.at("payload"));
  p.ab = j.at("ab").get<bool>();
  return p;
}

json channel_to_json(const Channel& ch) {
  json arr = json::array();
  for (const Packet& p : ch.in_flight) arr.push_back(packet_to_json(p));
  return arr;
}

const char* phase_name(SenderPhase p) {
  switch (p) {
    case SenderPhase::Idle: return "IDLE";
    case SenderPhase::SyncPhase: return "SYNC";
    default: return "DATA";
  }
}

SenderPhase phase_from_name(const std::string& s) {
  if (s == "IDLE") return SenderPhase::Idle;
  if (s == "SYNC") return SenderPhase::SyncPhase;
  if (s == "DATA") return SenderPhase::DataPhase;
  throw std::invalid_argument("unknown sender phase: " + s);
}

ChannelId chan_from_name(const std::string& s) {
  if (s == "ij") return ChannelId::IJ;
  if (s == "ji") return ChannelId::JI;
  throw std::invalid_argument("unknown channel: " + s);
}

json replay_record_to_json(const ReplayRecord& rec) {
  json j;
  if (const auto* m = std::get_if<Move>(&rec)) {
    if (const auto* d = std::get_if<MoveDeliver>(m)) {
      j["op"] = "deliver";
      j["chan"] = to_string(d->chan);
      j["index"] = d->index;
    } else if (const auto* d = std::get_if<MoveDrop>(m)) {
      j["op"] = "drop";
      j["chan"] = to_string(d->chan);
      j["index"] = d->index;
    } else if (const auto* n = std::get_if<MoveNoop>(m)) {
      j["op"] = "noop";
      j["chan"] = to_string(n->chan);
    } else if (std::holds_alternative<MoveTimer>(*m)) {
      j["op"] = "timer";
    } else {
      j["op"] = "submit";
    }
  } else {
    const OverflowChoice& c = std::get<OverflowChoice>(rec);
    j["op"] = "overflow";
    j["chan"] = to_string(c.chan);
    j["victim"] = c.victim;
  }
  return j;
}

ReplayRecord replay_record_from_json(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "deliver")
    return Move{MoveDeliver{chan_from_name(j.at("chan").get<std::string>()),
                            j.at("index").get<int>()}};
  if (op == "drop")
    return Move{MoveDrop{chan_from_name(j.at("chan").get<std::string>()),
                         j.at("index").get<int>()}};
  if (op == "noop") return Move{MoveNoop{chan_from_name(j.at("chan").get<std::string>())}};
  if (op == "timer") return Move{MoveTimer{}};
  if (op == "submit") return Move{MoveSubmit{}};
  if (op == "overflow")
    return OverflowChoice{chan_from_name(j.at("chan").get<std::string>()),
                          j.at("victim").get<int>()};
  throw std::invalid_argument("unknown replay op: " + op);
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = kScenarioSchema;
  j["protocol"] = to_string(s.config.protocol);
  j["c"] = s.config.config.c;
  if (!s.config.config.is_standard()) {
    j["ack_threshold"] = s.config.config.ack_threshold;
    j["copy_threshold"] = s.config.config.copy_threshold;
  }
  if (!s.note.empty()) j["note"] = s.note;

  json sender;
  sender["phase"] = phase_name(s.config.sender.phase);
  sender["ab"] = s.config.sender.ab;
  if (s.config.sender.phase != SenderPhase::Idle) {
    sender["pending"] = payload_to_json(s.config.sender.pending);
    sender["ack_count"] = s.config.sender.ack_count;
  }
  j["sender"] = std::move(sender);

  json receiver;
  receiver["last_delivered"] = s.config.receiver.last_delivered;
  json queue = json::array();
  for (const QueueEntry& e : s.config.receiver.queue.entries) {
    json entry;
    entry["payload"] = payload_to_json(e.payload);
    entry["ab"] = e.ab;
    entry["count"] = e.count;
    queue.push_back(std::move(entry));
  }
  receiver["queue"] = std::move(queue);
  j["receiver"] = std::move(receiver);

  j["chan_ij"] = channel_to_json(s.config.chan_ij);
  j["chan_ji"] = channel_to_json(s.config.chan_ji);

  json script = json::array();
  for (const Payload& p : s.config.script) script.push_back(payload_to_json(p));
  j["script"] = std::move(script);

  json replay = json::array();
  for (const ReplayRecord& rec : s.replay) replay.push_back(replay_record_to_json(rec));
  j["replay"] = std::move(replay);

  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("schema").get<std::string>() != kScenarioSchema)
    throw std::invalid_argument("unsupported scenario schema");

  Scenario s;
  const std::string protocol = j.at("protocol").get<std::string>();
  if (protocol == "sdl")
    s.config.protocol = ProtocolKind::Sdl;
  else if (protocol == "abp")
    s.config.protocol = ProtocolKind::Abp;
  else
    throw std::invalid_argument("unknown protocol: " + protocol);

  const int c = j.at("c").get<int>();
  s.config.config = ProtocolConfig::standard(c);
  if (j.contains("ack_threshold")) s.config.config.ack_threshold = j["ack_threshold"].get<int>();
  if (j.contains("copy_threshold")) s.config.config.copy_threshold = j["copy_threshold"].get<int>();
  if (j.contains("note")) s.note = j["note"].get<std::string>();

  const json& sender = j.at("sender");
  s.config.sender.phase = phase_from_name(sender.at("phase").get<std::string>());
  s.config.sender.ab = sender.at("ab").get<bool>();
  if (s.config.sender.phase != SenderPhase::Idle) {
    s.config.sender.pending = payload_from_json(sender.at("pending"));
    s.config.sender.ack_count = sender.at("ack_count").get<int>();
  }

  const json& receiver = j.at("receiver");
  s.config.receiver.last_delivered = receiver.at("last_delivered").get<bool>();
  for (const json& entry : receiver.at("queue")) {
    QueueEntry e;
    e.payload = payload_from_json(entry.at("payload"));
    e.ab = entry.at("ab").get<bool>();
    e.count = entry.at("count").get<int>();
    s.config.receiver.queue.entries.push_back(std::move(e));
  }

  s.config.chan_ij = Channel{ChannelId::IJ, c, {}};
  s.config.chan_ji = Channel{ChannelId::JI, c, {}};
  for (const json& p : j.at("chan_ij")) s.config.chan_ij.in_flight.push_back(packet_from_json(p));
  for (const json& p : j.at("chan_ji")) s.config.chan_ji.in_flight.push_back(packet_from_json(p));

  for (const json& p : j.at("script")) s.config.script.push_back(payload_from_json(p));
  for (const json& rec : j.at("replay")) s.replay.push_back(replay_record_from_json(rec));

  s.config.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << scenario_to_json(s) << '\n';
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace sdl
