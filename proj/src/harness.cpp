#include "sdl/harness.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdl {

void GlobalConfiguration::validate() const {
  if (config.c < 1) throw std::invalid_argument("capacity must be >= 1");
  if (protocol == ProtocolKind::Sdl)
    sender_init(config, sender);
  else
    abp_sender_init(sender);
  receiver_init(config, receiver);
  if (chan_ij.capacity != config.c || chan_ji.capacity != config.c)
    throw std::invalid_argument("channel capacity does not match configuration");
  if (static_cast<int>(chan_ij.in_flight.size()) > config.c ||
      static_cast<int>(chan_ji.in_flight.size()) > config.c)
    throw std::invalid_argument("initial channel contents exceed capacity");
  for (const Payload& p : script)
    if (!p.is_data()) throw std::invalid_argument("script payloads must be data");
}

World make_world(const GlobalConfiguration& cfg) {
  World w;
  w.protocol = cfg.protocol;
  w.config = cfg.config;
  w.sender = cfg.sender;
  w.receiver = cfg.receiver;
  w.chan_ij = cfg.chan_ij;
  w.chan_ji = cfg.chan_ji;
  w.chan_ij.id = ChannelId::IJ;
  w.chan_ji.id = ChannelId::JI;
  w.script = cfg.script;
  return w;
}

bool World::move_enabled(const Move& m) const {
  if (const auto* d = std::get_if<MoveDeliver>(&m))
    return d->index >= 0 && d->index < static_cast<int>(channel(d->chan).in_flight.size());
  if (const auto* d = std::get_if<MoveDrop>(&m))
    return d->index >= 0 && d->index < static_cast<int>(channel(d->chan).in_flight.size());
  if (const auto* n = std::get_if<MoveNoop>(&m)) return !channel(n->chan).empty();
  if (std::holds_alternative<MoveTimer>(m)) return sender.phase != SenderPhase::Idle;
  return sender.phase == SenderPhase::Idle && !script_exhausted();
}

std::vector<Move> World::enabled_moves() const {
  std::vector<Move> moves;
  for (ChannelId id : {ChannelId::IJ, ChannelId::JI}) {
    const Channel& ch = channel(id);
    for (int i = 0; i < static_cast<int>(ch.in_flight.size()); ++i) {
      moves.push_back(MoveDeliver{id, i});
      moves.push_back(MoveDrop{id, i});
    }
    if (!ch.empty()) moves.push_back(MoveNoop{id});
  }
  if (sender.phase != SenderPhase::Idle) moves.push_back(MoveTimer{});
  if (sender.phase == SenderPhase::Idle && !script_exhausted()) moves.push_back(MoveSubmit{});
  return moves;
}

namespace {

// The step counter advances whether or not the trace is kept, so recorded
// send/delivery steps are identical either way.
void push_event(std::vector<TraceEvent>* events, uint64_t* step, TraceEvent ev) {
  if (step) ev.step = (*step)++;
  if (!events) return;
  events->push_back(std::move(ev));
}

Actor chan_actor(ChannelId id) { return id == ChannelId::IJ ? Actor::ChannelIJ : Actor::ChannelJI; }

void emit_into_channel(World& w, ChannelId chan, const Packet& pkt, Actor from,
                       const OverflowChooser& choose_victim, MoveOutcome& out,
                       std::vector<TraceEvent>* events, uint64_t* step) {
  TraceEvent emit;
  emit.actor = from;
  emit.kind = TraceKind::PacketEmit;
  emit.chan = chan;
  emit.packet = pkt;
  push_event(events, step, std::move(emit));

  Channel& ch = w.channel(chan);
  int victim = -1;
  if (ch.full()) {
    victim = choose_victim(chan, ch, pkt);
    out.overflow = OverflowChoice{chan, victim};
  }
  ChannelSendOutcome sent = channel_send(ch, pkt, victim);
  if (sent.overflow) {
    TraceEvent drop;
    drop.actor = chan_actor(chan);
    drop.kind = TraceKind::PacketDropChannel;
    drop.chan = chan;
    drop.packet = sent.lost;
    drop.reason = "overflow";
    push_event(events, step, std::move(drop));
  }
}

void apply_actions(World& w, const std::vector<Action>& actions, Actor from,
                   const OverflowChooser& choose_victim, MoveOutcome& out,
                   std::vector<TraceEvent>* events, uint64_t* step) {
  for (const Action& a : actions) {
    if (const auto* e = std::get_if<EmitPacket>(&a)) {
      emit_into_channel(w, e->chan, e->packet, from, choose_victim, out, events, step);
    } else if (const auto* dm = std::get_if<DeliverMessage>(&a)) {
      out.delivered_message = DeliveryRecord{dm->payload, dm->ab, step ? *step : 0};
      TraceEvent ev;
      ev.actor = Actor::Receiver;
      ev.kind = TraceKind::DeliverMessage;
      ev.payload = dm->payload;
      ev.ab = dm->ab;
      push_event(events, step, std::move(ev));
    } else if (const auto* dr = std::get_if<DropMessage>(&a)) {
      out.dropped_message = dr->payload;
      TraceEvent ev;
      ev.actor = Actor::Receiver;
      ev.kind = TraceKind::DropMessage;
      ev.payload = dr->payload;
      ev.ab = dr->ab;
      push_event(events, step, std::move(ev));
    } else if (const auto* da = std::get_if<DeliverAck>(&a)) {
      out.delivered_ack = da->payload;
      TraceEvent ev;
      ev.actor = Actor::Sender;
      ev.kind = TraceKind::DeliverAck;
      ev.payload = da->payload;
      push_event(events, step, std::move(ev));
    }
    // ArmResendTimer: the timer is armed exactly while the sender is not idle.
  }
}

}  // namespace

MoveOutcome apply_move(World& w, const Move& m, const OverflowChooser& choose_victim,
                       std::vector<TraceEvent>* events, uint64_t* event_step) {
  MoveOutcome out;
  if (!w.move_enabled(m)) throw std::logic_error("move not enabled: " + to_string(m));

  if (const auto* d = std::get_if<MoveDeliver>(&m)) {
    Packet pkt = channel_take(w.channel(d->chan), d->index);
    out.channel_delivery = class_of(pkt);
    TraceEvent ev;
    ev.actor = chan_actor(d->chan);
    ev.kind = TraceKind::PacketDeliver;
    ev.chan = d->chan;
    ev.packet = pkt;
    push_event(events, event_step, std::move(ev));

    if (d->chan == ChannelId::IJ) {
      ReceiverResult r = w.protocol == ProtocolKind::Sdl
                             ? receiver_on_packet(w.receiver, pkt, w.config)
                             : abp_receiver_on_packet(w.receiver, pkt);
      w.receiver = r.state;
      apply_actions(w, r.actions, Actor::Receiver, choose_victim, out, events, event_step);
    } else {
      SenderResult r = w.protocol == ProtocolKind::Sdl
                           ? sender_on_packet(w.sender, pkt, w.config)
                           : abp_sender_on_packet(w.sender, pkt);
      w.sender = r.state;
      apply_actions(w, r.actions, Actor::Sender, choose_victim, out, events, event_step);
    }
    return out;
  }

  if (const auto* d = std::get_if<MoveDrop>(&m)) {
    Packet pkt = channel_take(w.channel(d->chan), d->index);
    TraceEvent ev;
    ev.actor = chan_actor(d->chan);
    ev.kind = TraceKind::PacketDropChannel;
    ev.chan = d->chan;
    ev.packet = pkt;
    ev.reason = "adversary";
    push_event(events, event_step, std::move(ev));
    return out;
  }

  if (std::holds_alternative<MoveNoop>(m)) return out;

  if (std::holds_alternative<MoveTimer>(m)) {
    TraceEvent ev;
    ev.actor = Actor::Sender;
    ev.kind = TraceKind::Timer;
    push_event(events, event_step, std::move(ev));
    SenderResult r = w.protocol == ProtocolKind::Sdl ? sender_on_timer(w.sender, w.config)
                                                     : abp_sender_on_timer(w.sender);
    w.sender = r.state;
    apply_actions(w, r.actions, Actor::Sender, choose_victim, out, events, event_step);
    return out;
  }

  // MoveSubmit
  const Payload& p = w.script[w.script_pos++];
  out.submitted = p;
  out.submitted_step = event_step ? *event_step : 0;
  TraceEvent ev;
  ev.actor = Actor::App;
  ev.kind = TraceKind::SendRequest;
  ev.payload = p;
  push_event(events, event_step, std::move(ev));
  SenderResult r = w.protocol == ProtocolKind::Sdl
                       ? sender_on_send_request(w.sender, p, w.config)
                       : abp_sender_on_send_request(w.sender, p);
  w.sender = r.state;
  apply_actions(w, r.actions, Actor::Sender, choose_victim, out, events, event_step);
  return out;
}

namespace {

std::vector<PacketClass> classes_in_flight(const Channel& ch) {
  std::vector<PacketClass> out;
  out.reserve(ch.in_flight.size());
  for (const Packet& p : ch.in_flight) out.push_back(class_of(p));
  return out;
}

}  // namespace

RunOutcome run(const GlobalConfiguration& cfg, Adversary& adversary, uint64_t seed,
               const RunOptions& opts) {
  cfg.validate();
  World w = make_world(cfg);
  Rng rng(seed);
  const int budget = opts.fairness_budget > 0 ? opts.fairness_budget : 4 * cfg.config.c;
  FairnessReferee referee_ij(budget);
  FairnessReferee referee_ji(budget);

  RunOutcome out;
  out.referee.budget = budget;
  uint64_t event_step = 0;
  std::vector<TraceEvent>* events = opts.record_trace ? &out.trace : nullptr;

  if (w.sender.phase != SenderPhase::Idle) {
    out.synthetic_send = SendRecord{w.sender.pending, 0, true};
    TraceEvent ev;
    ev.actor = Actor::Sender;
    ev.kind = TraceKind::SendRequest;
    ev.payload = w.sender.pending;
    ev.synthetic = true;
    push_event(events, &event_step, std::move(ev));
  }

  auto referee_for = [&](ChannelId id) -> FairnessReferee& {
    return id == ChannelId::IJ ? referee_ij : referee_ji;
  };

  OverflowChooser choose_victim = [&](ChannelId chan, const Channel& ch,
                                      const Packet& incoming) -> int {
    int victim = adversary.choose_overflow_victim(w, chan, incoming, rng);
    if (opts.referee_enabled)
      victim = referee_for(chan).override_overflow_victim(ch, incoming, victim);
    out.decisions.push_back(OverflowChoice{chan, victim});
    const PacketClass lost =
        victim < 0 ? class_of(incoming) : class_of(ch.in_flight[victim]);
    referee_for(chan).note_overflow_loss(lost);
    return victim;
  };

  while (!w.terminated()) {
    if (out.steps_used >= opts.step_limit) {
      out.liveness_failure = true;
      break;
    }

    Move move{MoveTimer{}};
    bool forced = false;
    if (opts.referee_enabled) {
      for (ChannelId id : {ChannelId::IJ, ChannelId::JI}) {
        int idx = referee_for(id).forced_delivery_index(w.channel(id));
        if (idx >= 0) {
          move = MoveDeliver{id, idx};
          forced = true;
          break;
        }
      }
    }
    if (!forced) move = adversary.choose_move(w, rng);
    if (!w.move_enabled(move))
      throw std::logic_error("adversary chose a disabled move: " + to_string(move));

    const std::vector<PacketClass> present_ij = classes_in_flight(w.chan_ij);
    const std::vector<PacketClass> present_ji = classes_in_flight(w.chan_ji);
    const bool touches_ij =
        std::visit([](const auto& mv) {
          using T = std::decay_t<decltype(mv)>;
          if constexpr (std::is_same_v<T, MoveDeliver> || std::is_same_v<T, MoveDrop> ||
                        std::is_same_v<T, MoveNoop>)
            return mv.chan == ChannelId::IJ;
          else
            return false;
        }, move);
    const bool touches_ji =
        std::visit([](const auto& mv) {
          using T = std::decay_t<decltype(mv)>;
          if constexpr (std::is_same_v<T, MoveDeliver> || std::is_same_v<T, MoveDrop> ||
                        std::is_same_v<T, MoveNoop>)
            return mv.chan == ChannelId::JI;
          else
            return false;
        }, move);

    out.decisions.push_back(move);
    MoveOutcome mo = apply_move(w, move, choose_victim, events, &event_step);
    ++out.steps_used;

    if (mo.submitted)
      out.send_log.push_back(SendRecord{*mo.submitted, mo.submitted_step, false});
    if (mo.delivered_message) out.delivery_log.push_back(*mo.delivered_message);

    // A step on a channel defers every class it did not deliver.
    if (touches_ij)
      referee_ij.note_step(present_ij,
                           mo.channel_delivery ? &*mo.channel_delivery : nullptr);
    if (touches_ji)
      referee_ji.note_step(present_ji,
                           mo.channel_delivery ? &*mo.channel_delivery : nullptr);
  }

  out.terminated = w.terminated();
  out.referee.max_streak_ij = referee_ij.max_streak_seen();
  out.referee.max_streak_ji = referee_ji.max_streak_seen();
  return out;
}

std::vector<Payload> default_alphabet(size_t n) {
  std::vector<Payload> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::string name;
    size_t k = i;
    do {
      name.insert(name.begin(), static_cast<char>('a' + k % 26));
      k = k / 26;
    } while (k > 0);
    out.push_back(Payload::data(name));
  }
  return out;
}

GlobalConfiguration clean_configuration(ProtocolKind protocol, int c, std::vector<Payload> script) {
  GlobalConfiguration cfg;
  cfg.protocol = protocol;
  cfg.config = ProtocolConfig::standard(c);
  cfg.chan_ij = Channel{ChannelId::IJ, c, {}};
  cfg.chan_ji = Channel{ChannelId::JI, c, {}};
  cfg.script = std::move(script);
  return cfg;
}

GlobalConfiguration arbitrary_configuration(Rng& rng, ProtocolKind protocol, int c,
                                            const std::vector<Payload>& alphabet,
                                            std::vector<Payload> script) {
  if (alphabet.empty()) throw std::invalid_argument("alphabet must not be empty");
  GlobalConfiguration cfg = clean_configuration(protocol, c, std::move(script));

  SenderState s;
  s.ab = rng.uniform(2) == 1;
  const uint64_t phase_count = protocol == ProtocolKind::Sdl ? 3 : 2;
  switch (rng.uniform(phase_count)) {
    case 0: s.phase = SenderPhase::Idle; break;
    case 1: s.phase = SenderPhase::DataPhase; break;
    default: s.phase = SenderPhase::SyncPhase; break;
  }
  if (s.phase != SenderPhase::Idle) {
    s.pending = alphabet[rng.uniform(alphabet.size())];
    if (protocol == ProtocolKind::Sdl)
      s.ack_count = static_cast<int>(rng.uniform(cfg.config.ack_threshold));
  }
  cfg.sender = s;

  ReceiverState r;
  r.last_delivered = rng.uniform(2) == 1;
  const int cap = c + 1;
  const int entries = static_cast<int>(rng.uniform(cap + 1));
  std::vector<std::pair<Payload, bool>> classes;
  for (const Payload& p : alphabet)
    for (bool ab : {false, true}) classes.emplace_back(p, ab);
  for (bool ab : {false, true}) classes.emplace_back(Payload::synchro(), ab);
  for (int i = 0; i < entries && !classes.empty(); ++i) {
    const uint64_t pick = rng.uniform(classes.size());
    QueueEntry e;
    e.payload = classes[pick].first;
    e.ab = classes[pick].second;
    e.count = 1 + static_cast<int>(rng.uniform(cap));
    classes.erase(classes.begin() + pick);
    r.queue.entries.push_back(std::move(e));
  }
  cfg.receiver = r;

  cfg.chan_ij = channel_init_arbitrary(rng, ChannelId::IJ, c, alphabet);
  cfg.chan_ji = channel_init_arbitrary(rng, ChannelId::JI, c, alphabet);
  return cfg;
}

}  // namespace sdl
