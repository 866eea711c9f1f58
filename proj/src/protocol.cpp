#include "sdl/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdl {

ProtocolConfig ProtocolConfig::standard(int c) {
  if (c < 1) throw std::invalid_argument("capacity must be >= 1");
  return ProtocolConfig{c, 3 * c + 2, c + 1};
}

ProtocolConfig ProtocolConfig::with_ack_threshold(int c, int ack_threshold) {
  ProtocolConfig cfg = standard(c);
  cfg.ack_threshold = ack_threshold;
  return cfg;
}

std::pair<ReceiverQueue, int> q_bump(ReceiverQueue q, const Payload& m, bool ab, int c) {
  const int cap = c + 1;
  auto it = std::find_if(q.entries.begin(), q.entries.end(),
                         [&](const QueueEntry& e) { return e.payload == m && e.ab == ab; });
  if (it != q.entries.end()) {
    QueueEntry e = *it;
    e.count = std::min(e.count + 1, cap);
    q.entries.erase(it);
    q.entries.insert(q.entries.begin(), e);
    return {std::move(q), q.entries.front().count};
  }
  if (static_cast<int>(q.entries.size()) >= cap) q.entries.pop_back();
  q.entries.insert(q.entries.begin(), QueueEntry{m, ab, 1});
  return {std::move(q), 1};
}

SenderState sender_init(const ProtocolConfig& cfg, const std::optional<SenderState>& initial) {
  if (!initial) return SenderState{};
  const SenderState& s = *initial;
  if (s.phase != SenderPhase::Idle) {
    if (s.ack_count < 0 || s.ack_count >= cfg.ack_threshold)
      throw std::invalid_argument("sender ack_count out of range for non-idle phase");
    if (!s.pending.is_data())
      throw std::invalid_argument("sender pending payload must be data");
  } else if (s.ack_count != 0) {
    throw std::invalid_argument("idle sender must have ack_count 0");
  }
  return s;
}

ReceiverState receiver_init(const ProtocolConfig& cfg, const std::optional<ReceiverState>& initial) {
  if (!initial) return ReceiverState{};
  const ReceiverState& r = *initial;
  const int cap = cfg.c + 1;
  if (static_cast<int>(r.queue.entries.size()) > cap)
    throw std::invalid_argument("receiver queue longer than c+1");
  for (size_t i = 0; i < r.queue.entries.size(); ++i) {
    const QueueEntry& e = r.queue.entries[i];
    if (e.count < 1 || e.count > cap)
      throw std::invalid_argument("receiver queue count out of [1, c+1]");
    for (size_t k = i + 1; k < r.queue.entries.size(); ++k) {
      const QueueEntry& o = r.queue.entries[k];
      if (o.payload == e.payload && o.ab == e.ab)
        throw std::invalid_argument("receiver queue has duplicate (payload, ab) entry");
    }
  }
  return r;
}

static Packet current_resend_packet(const SenderState& s) {
  Payload p = s.phase == SenderPhase::SyncPhase ? Payload::synchro() : s.pending;
  return Packet{PacketDir::Msg, std::move(p), s.ab};
}

SenderResult sender_on_send_request(const SenderState& s, const Payload& m, const ProtocolConfig&) {
  if (s.phase != SenderPhase::Idle)
    throw std::logic_error("send request while a send is in progress");
  if (!m.is_data()) throw std::invalid_argument("applications send data payloads only");
  SenderState next = s;
  next.ab = !s.ab;
  next.phase = SenderPhase::SyncPhase;
  next.pending = m;
  next.ack_count = 0;
  std::vector<Action> actions;
  actions.push_back(EmitPacket{ChannelId::IJ, Packet{PacketDir::Msg, Payload::synchro(), next.ab}});
  actions.push_back(ArmResendTimer{});
  return {next, std::move(actions)};
}

SenderResult sender_on_timer(const SenderState& s, const ProtocolConfig&) {
  if (s.phase == SenderPhase::Idle) return {s, {}};  // stale timer
  std::vector<Action> actions;
  actions.push_back(EmitPacket{ChannelId::IJ, current_resend_packet(s)});
  actions.push_back(ArmResendTimer{});
  return {s, std::move(actions)};
}

SenderResult sender_on_packet(const SenderState& s, const Packet& pkt, const ProtocolConfig& cfg) {
  if (s.phase == SenderPhase::Idle) return {s, {}};
  if (pkt.dir != PacketDir::Ack) return {s, {}};  // stray MSG on (j,i)
  const Packet expected = current_resend_packet(s);
  if (pkt.payload != expected.payload || pkt.ab != expected.ab) return {s, {}};

  SenderState next = s;
  next.ack_count = s.ack_count + 1;
  if (next.ack_count < cfg.ack_threshold) return {next, {}};

  if (s.phase == SenderPhase::SyncPhase) {
    next.phase = SenderPhase::DataPhase;
    next.ab = !s.ab;
    next.ack_count = 0;
    std::vector<Action> actions;
    actions.push_back(EmitPacket{ChannelId::IJ, Packet{PacketDir::Msg, next.pending, next.ab}});
    actions.push_back(ArmResendTimer{});
    return {next, std::move(actions)};
  }
  next.phase = SenderPhase::Idle;
  next.ack_count = 0;
  next.pending = Payload{};  // meaningful only while a send is in progress
  std::vector<Action> actions;
  actions.push_back(DeliverAck{s.pending});
  return {next, std::move(actions)};
}

ReceiverResult receiver_on_packet(const ReceiverState& s, const Packet& pkt, const ProtocolConfig& cfg) {
  if (pkt.dir != PacketDir::Msg) return {s, {}};  // stray ACK on (i,j), no ack back

  ReceiverState next = s;
  auto [queue, count] = q_bump(std::move(next.queue), pkt.payload, pkt.ab, cfg.c);
  next.queue = std::move(queue);

  std::vector<Action> actions;
  if (count >= cfg.copy_threshold) {
    if (pkt.ab != s.last_delivered) {
      if (pkt.payload.is_data())
        actions.push_back(DeliverMessage{pkt.payload, pkt.ab});
      else
        actions.push_back(DropMessage{pkt.payload, pkt.ab});
      next.last_delivered = pkt.ab;
    }
    next.queue.entries.clear();  // Q := bottom, even when the bit matched
  }
  actions.push_back(EmitPacket{ChannelId::JI, Packet{PacketDir::Ack, pkt.payload, pkt.ab}});
  return {next, std::move(actions)};
}

SenderState abp_sender_init(const std::optional<SenderState>& initial) {
  if (!initial) return SenderState{};
  const SenderState& s = *initial;
  if (s.phase == SenderPhase::SyncPhase)
    throw std::invalid_argument("alternating-bit sender has no sync phase");
  if (s.ack_count != 0) throw std::invalid_argument("alternating-bit sender counts to one ack");
  if (s.phase == SenderPhase::DataPhase && !s.pending.is_data())
    throw std::invalid_argument("sender pending payload must be data");
  return s;
}

SenderResult abp_sender_on_send_request(const SenderState& s, const Payload& m) {
  if (s.phase != SenderPhase::Idle)
    throw std::logic_error("send request while a send is in progress");
  if (!m.is_data()) throw std::invalid_argument("applications send data payloads only");
  SenderState next = s;
  next.ab = !s.ab;
  next.phase = SenderPhase::DataPhase;
  next.pending = m;
  next.ack_count = 0;
  std::vector<Action> actions;
  actions.push_back(EmitPacket{ChannelId::IJ, Packet{PacketDir::Msg, m, next.ab}});
  actions.push_back(ArmResendTimer{});
  return {next, std::move(actions)};
}

SenderResult abp_sender_on_timer(const SenderState& s) {
  if (s.phase == SenderPhase::Idle) return {s, {}};
  std::vector<Action> actions;
  actions.push_back(EmitPacket{ChannelId::IJ, Packet{PacketDir::Msg, s.pending, s.ab}});
  actions.push_back(ArmResendTimer{});
  return {s, std::move(actions)};
}

SenderResult abp_sender_on_packet(const SenderState& s, const Packet& pkt) {
  if (s.phase == SenderPhase::Idle) return {s, {}};
  if (pkt.dir != PacketDir::Ack) return {s, {}};
  if (pkt.payload != s.pending || pkt.ab != s.ab) return {s, {}};
  SenderState next = s;
  next.phase = SenderPhase::Idle;
  next.ack_count = 0;
  next.pending = Payload{};
  std::vector<Action> actions;
  actions.push_back(DeliverAck{s.pending});
  return {next, std::move(actions)};
}

ReceiverResult abp_receiver_on_packet(const ReceiverState& s, const Packet& pkt) {
  if (pkt.dir != PacketDir::Msg) return {s, {}};
  ReceiverState next = s;
  std::vector<Action> actions;
  if (pkt.ab != s.last_delivered) {
    if (pkt.payload.is_data())
      actions.push_back(DeliverMessage{pkt.payload, pkt.ab});
    else
      actions.push_back(DropMessage{pkt.payload, pkt.ab});
    next.last_delivered = pkt.ab;
  }
  actions.push_back(EmitPacket{ChannelId::JI, Packet{PacketDir::Ack, pkt.payload, pkt.ab}});
  return {next, std::move(actions)};
}

}  // namespace sdl
