#include "sdl/oracle.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace sdl {

const char* to_string(DeliveryVerdict v) {
  switch (v) {
    case DeliveryVerdict::Normal: return "NORMAL";
    case DeliveryVerdict::Duplicate: return "DUPLICATE";
    default: return "PHANTOM";
  }
}

uint64_t Classification::count(DeliveryVerdict v) const {
  return static_cast<uint64_t>(
      std::count_if(deliveries.begin(), deliveries.end(),
                    [&](const ClassifiedDelivery& d) { return d.verdict == v; }));
}

uint64_t Classification::lost_sends() const {
  return static_cast<uint64_t>(
      std::count(script_delivered.begin(), script_delivered.end(), false));
}

namespace {

struct SendEntry {
  Payload payload;
  uint64_t step = 0;
  bool synthetic = false;
  bool matched = false;
};

// Bare matcher: greedy in delivery order against the earliest unmatched send
// with equal payload, no ordering information.
void match_bare(std::vector<SendEntry>& sends, const std::vector<DeliveryRecord>& deliveries,
                Classification& cl, const std::function<int(size_t)>& effective_index) {
  for (size_t di = 0; di < deliveries.size(); ++di) {
    const DeliveryRecord& d = deliveries[di];
    ClassifiedDelivery cd;
    cd.payload = d.payload;
    cd.position = di + 1;
    int pick = -1;
    for (size_t si = 0; si < sends.size(); ++si)
      if (!sends[si].matched && sends[si].payload == d.payload) {
        pick = static_cast<int>(si);
        break;
      }
    if (pick >= 0) {
      sends[pick].matched = true;
      cd.verdict = DeliveryVerdict::Normal;
      cd.effective_send = effective_index(static_cast<size_t>(pick));
    } else {
      int earliest = -1;
      for (size_t si = 0; si < sends.size(); ++si)
        if (sends[si].payload == d.payload) {
          earliest = static_cast<int>(si);
          break;
        }
      if (earliest >= 0) {
        cd.verdict = DeliveryVerdict::Duplicate;
        cd.effective_send = effective_index(static_cast<size_t>(earliest));
      } else {
        cd.verdict = DeliveryVerdict::Phantom;
      }
    }
    cl.deliveries.push_back(std::move(cd));
  }
}

// Causal matcher for finished runs. Within each payload the pairing is
// order-preserving: each arriving delivery reserves the latest send already
// made and still free; the reserved sends then belong to the latest
// deliveries, so any surplus sits at the front as stale duplicates of later
// sends (initial-state garbage can only fake the first crossing). The
// pre-run pending send is the earliest send and is reserved last, which
// leaves it unmatched, not a script send, when a send must go undelivered.
void match_causal(std::vector<SendEntry>& sends, const std::vector<DeliveryRecord>& deliveries,
                  Classification& cl, const std::function<int(size_t)>& effective_index) {
  for (size_t di = 0; di < deliveries.size(); ++di) {
    ClassifiedDelivery cd;
    cd.payload = deliveries[di].payload;
    cd.position = di + 1;
    cl.deliveries.push_back(std::move(cd));
  }

  // Reserve sends per delivery arrival: latest eligible first.
  for (size_t di = 0; di < deliveries.size(); ++di) {
    const DeliveryRecord& d = deliveries[di];
    int pick = -1;
    for (size_t si = 0; si < sends.size(); ++si)
      if (!sends[si].matched && sends[si].payload == d.payload && sends[si].step < d.step)
        pick = static_cast<int>(si);
    if (pick >= 0) sends[pick].matched = true;
  }

  // Assign the reserved sends of each payload to its latest deliveries,
  // in order; the leading surplus is duplicate (ever sent) or phantom.
  std::vector<Payload> seen;
  for (size_t di = 0; di < deliveries.size(); ++di) {
    const Payload& p = deliveries[di].payload;
    bool done = false;
    for (const Payload& q : seen) done = done || q == p;
    if (done) continue;
    seen.push_back(p);

    std::vector<size_t> dels;
    for (size_t k = 0; k < deliveries.size(); ++k)
      if (deliveries[k].payload == p) dels.push_back(k);
    std::vector<size_t> reserved;
    for (size_t si = 0; si < sends.size(); ++si)
      if (sends[si].matched && sends[si].payload == p) reserved.push_back(si);

    const size_t surplus = dels.size() - reserved.size();
    int earliest = -1;
    for (size_t si = 0; si < sends.size(); ++si)
      if (sends[si].payload == p) {
        earliest = static_cast<int>(si);
        break;
      }
    for (size_t j = 0; j < dels.size(); ++j) {
      ClassifiedDelivery& cd = cl.deliveries[dels[j]];
      if (j < surplus) {
        if (earliest >= 0) {
          cd.verdict = DeliveryVerdict::Duplicate;
          cd.effective_send = effective_index(static_cast<size_t>(earliest));
        } else {
          cd.verdict = DeliveryVerdict::Phantom;
        }
      } else {
        cd.verdict = DeliveryVerdict::Normal;
        cd.effective_send = effective_index(reserved[j - surplus]);
      }
    }
  }
}

Classification classify_impl(std::vector<SendEntry> sends,
                             const std::vector<DeliveryRecord>& deliveries, bool causal) {
  Classification cl;

  auto effective_index = [&sends](size_t send_idx) -> int {
    int script_rank = 0;
    for (size_t i = 0; i < send_idx; ++i)
      if (!sends[i].synthetic) ++script_rank;
    return sends[send_idx].synthetic ? 0 : script_rank + 1;
  };

  if (causal)
    match_causal(sends, deliveries, cl, effective_index);
  else
    match_bare(sends, deliveries, cl, effective_index);

  // A delivery is reordered when a later delivery carries an earlier send.
  for (size_t i = 0; i < cl.deliveries.size(); ++i) {
    if (!cl.deliveries[i].effective_send) continue;
    for (size_t k = i + 1; k < cl.deliveries.size(); ++k) {
      if (!cl.deliveries[k].effective_send) continue;
      if (*cl.deliveries[k].effective_send < *cl.deliveries[i].effective_send) {
        cl.deliveries[i].reordered = true;
        break;
      }
    }
  }

  uint64_t script_pos = 0;
  for (const SendEntry& s : sends) {
    if (s.synthetic) continue;
    ++script_pos;
    cl.script_delivered.push_back(s.matched);
    if (!s.matched) cl.observed.alpha = script_pos;
  }
  for (const ClassifiedDelivery& d : cl.deliveries) {
    if (d.verdict == DeliveryVerdict::Duplicate) cl.observed.beta = d.position;
    if (d.verdict == DeliveryVerdict::Phantom) cl.observed.gamma = d.position;
    if (d.reordered) cl.observed.delta = d.position;
  }
  return cl;
}

}  // namespace

Classification classify(const std::vector<Payload>& send_log,
                        const std::vector<Payload>& delivery_log) {
  std::vector<SendEntry> sends;
  sends.reserve(send_log.size());
  for (const Payload& p : send_log) sends.push_back(SendEntry{p, 0, false, false});
  std::vector<DeliveryRecord> deliveries;
  deliveries.reserve(delivery_log.size());
  for (const Payload& p : delivery_log) deliveries.push_back(DeliveryRecord{p, false, 0});
  return classify_impl(std::move(sends), deliveries, /*causal=*/false);
}

Classification classify_run(const RunOutcome& outcome) {
  std::vector<SendEntry> sends;
  if (outcome.synthetic_send)
    sends.push_back(SendEntry{outcome.synthetic_send->payload, outcome.synthetic_send->step,
                              true, false});
  for (const SendRecord& s : outcome.send_log)
    sends.push_back(SendEntry{s.payload, s.step, false, false});
  return classify_impl(std::move(sends), outcome.delivery_log, /*causal=*/true);
}

BoundCheck check_bounds(const Classification& cl, const BoundSpec& spec) {
  BoundCheck out;
  struct Row {
    const char* metric;
    uint64_t observed;
    uint64_t allowed;
  };
  const Row rows[] = {
      {"alpha", cl.observed.alpha, spec.alpha},
      {"beta", cl.observed.beta, spec.beta},
      {"gamma", cl.observed.gamma, spec.gamma},
      {"delta", cl.observed.delta, spec.delta},
  };
  for (const Row& r : rows) {
    if (r.observed <= r.allowed) continue;
    BoundViolation v;
    v.metric = r.metric;
    v.observed = r.observed;
    v.allowed = r.allowed;
    if (v.metric == "alpha") {
      for (size_t i = 0; i < cl.script_delivered.size(); ++i)
        if (!cl.script_delivered[i] && i + 1 > r.allowed) v.offending_positions.push_back(i + 1);
    } else {
      for (const ClassifiedDelivery& d : cl.deliveries) {
        const bool offends =
            (v.metric == "beta" && d.verdict == DeliveryVerdict::Duplicate) ||
            (v.metric == "gamma" && d.verdict == DeliveryVerdict::Phantom) ||
            (v.metric == "delta" && d.reordered);
        if (offends && d.position > r.allowed) v.offending_positions.push_back(d.position);
      }
    }
    out.violations.push_back(std::move(v));
    out.pass = false;
  }
  return out;
}

RunVerdict evaluate_run(const RunOutcome& outcome, const BoundSpec& spec) {
  RunVerdict v;
  v.liveness_failure = outcome.liveness_failure;
  v.classification = classify_run(outcome);
  v.bounds = check_bounds(v.classification, spec);
  v.pass = !v.liveness_failure && v.bounds.pass;
  return v;
}

OverheadReport overhead(const RunOutcome& outcome) {
  OverheadReport r;
  for (const TraceEvent& ev : outcome.trace) {
    if (ev.kind == TraceKind::PacketEmit && ev.chan) {
      if (*ev.chan == ChannelId::IJ)
        ++r.msg_emits_ij;
      else
        ++r.ack_emits_ji;
    }
  }
  r.deliveries = outcome.delivery_log.size();
  if (r.deliveries == 0) return r;
  r.defined = true;
  r.msg_emits_per_delivery = static_cast<double>(r.msg_emits_ij) / r.deliveries;
  r.ack_emits_per_delivery = static_cast<double>(r.ack_emits_ji) / r.deliveries;
  const Classification cl = classify_run(outcome);
  for (size_t i = 0; i < cl.deliveries.size(); ++i) {
    if (cl.deliveries[i].verdict == DeliveryVerdict::Normal) {
      r.steps_to_first_normal_delivery = outcome.delivery_log[i].step;
      break;
    }
  }
  return r;
}

namespace {

Scenario record_scenario(GlobalConfiguration cfg, const std::string& note) {
  auto eager = make_eager_adversary();
  const RunOutcome outcome = run(cfg, *eager, /*seed=*/0);
  if (!outcome.terminated) throw std::logic_error("witness construction did not terminate");
  Scenario s;
  s.config = std::move(cfg);
  s.replay = outcome.decisions;
  s.note = note;
  return s;
}

void expect_bounds(const Scenario& s, const ObservedBounds& want) {
  auto replay = make_replay_adversary(s.replay);
  RunOptions opts;
  opts.referee_enabled = false;
  const RunOutcome outcome = run(s.config, *replay, 0, opts);
  const Classification cl = classify_run(outcome);
  if (!(cl.observed == want)) throw std::logic_error("witness scenario missed its target bounds");
}

}  // namespace

Scenario witness_phantom(int c) {
  GlobalConfiguration cfg = clean_configuration(ProtocolKind::Sdl, c, {Payload::data("a")});
  const Payload ghost = Payload::data("z");
  cfg.receiver.last_delivered = false;
  cfg.receiver.queue.entries.push_back(QueueEntry{ghost, true, c});
  cfg.chan_ij.in_flight.push_back(Packet{PacketDir::Msg, ghost, true});
  Scenario s = record_scenario(std::move(cfg), "first delivery is a never-sent payload");
  expect_bounds(s, ObservedBounds{0, 0, 1, 0});
  return s;
}

Scenario witness_duplicate(int c) {
  GlobalConfiguration cfg = clean_configuration(ProtocolKind::Sdl, c, {Payload::data("a")});
  const Payload copy = Payload::data("a");
  cfg.receiver.last_delivered = false;
  cfg.receiver.queue.entries.push_back(QueueEntry{copy, true, c});
  cfg.chan_ij.in_flight.push_back(Packet{PacketDir::Msg, copy, true});
  Scenario s = record_scenario(std::move(cfg),
                               "first delivery is a stale copy of the first scripted payload");
  expect_bounds(s, ObservedBounds{0, 1, 0, 0});
  return s;
}

Scenario witness_reorder(int c) {
  GlobalConfiguration cfg =
      clean_configuration(ProtocolKind::Sdl, c, {Payload::data("a"), Payload::data("b")});
  const Payload copy = Payload::data("b");
  cfg.receiver.last_delivered = false;
  cfg.receiver.queue.entries.push_back(QueueEntry{copy, true, c});
  cfg.chan_ij.in_flight.push_back(Packet{PacketDir::Msg, copy, true});
  Scenario s = record_scenario(std::move(cfg),
                               "first delivery is a stale copy of the second scripted payload");
  expect_bounds(s, ObservedBounds{0, 1, 0, 1});
  return s;
}

Scenario witness_abp_loss(int c) {
  GlobalConfiguration cfg = clean_configuration(ProtocolKind::Abp, c, {Payload::data("a")});
  cfg.sender.ab = true;          // flips to false on submission
  cfg.receiver.last_delivered = false;  // equal bits: the receiver stays silent
  Scenario s = record_scenario(std::move(cfg),
                               "bit-misaligned start; the baseline acks without delivering");
  expect_bounds(s, ObservedBounds{1, 0, 0, 0});
  return s;
}

}  // namespace sdl
