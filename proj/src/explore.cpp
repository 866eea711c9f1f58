#include "sdl/explore.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sdl/rng.hpp"

namespace sdl {

namespace {

// Bit layout of a packed state. Absent fields are zero so equal states pack
// to equal words.
constexpr int kPhaseOff = 0;       // 2 bits
constexpr int kSenderAbOff = 2;    // 1
constexpr int kPendingOff = 3;     // 1
constexpr int kAckOff = 4;         // 3
constexpr int kLastOff = 7;        // 1
constexpr int kQLenOff = 8;        // 2
constexpr int kQE0Off = 10;        // payload 2, ab 1, count-1 1
constexpr int kQE1Off = 14;
constexpr int kIjLenOff = 18;      // 1
constexpr int kIjPktOff = 19;      // dir 1, payload 2, ab 1
constexpr int kJiLenOff = 23;      // 1
constexpr int kJiPktOff = 24;
constexpr int kScriptPosOff = 28;  // 2
constexpr int kMatchedOff = 30;    // 3 (bit 0: synthetic, bits 1..2: script) - reserved sends
constexpr int kSynthOff = 33;      // 1
constexpr int kSynthPayloadOff = 34;  // 1 (alphabet index of the pre-run pending send)
constexpr int kNDelivOff = 35;     // 3, saturates at 5
constexpr int kSeqOff = 38;        // 4 x 1 bit: payload index of deliveries 1..4
constexpr int kTagOff = 42;        // always 1

constexpr uint64_t field(uint64_t v, int off) { return v << off; }
constexpr uint64_t get(uint64_t w, int off, int len) { return (w >> off) & ((1ULL << len) - 1); }

enum : uint64_t { kKindNone = 0, kKindNormal = 1, kKindDup = 2, kKindPhantom = 3 };

struct Summary {
  uint64_t matched = 0;  // bit 0: synthetic send, bit i+1: script send i (reserved)
  bool synth = false;
  uint64_t synth_payload = 0;  // alphabet index, meaningful when synth
  uint64_t ndeliv = 0;         // saturates at 5; positions beyond 4 are violations
  uint64_t seq = 0;            // payload index of delivery at position i, bit i-1

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct Ctx {
  ExploreParams params;
  ProtocolConfig config = ProtocolConfig::standard(1);
  std::vector<Payload> alphabet;
  std::vector<Payload> script;

  uint64_t payload_index(const Payload& p) const {  // alphabet index; SYNCHRO last
    if (p.is_synchro()) return alphabet.size();
    for (size_t i = 0; i < alphabet.size(); ++i)
      if (alphabet[i] == p) return i;
    throw std::logic_error("payload outside the explorer alphabet");
  }

  Payload payload_at(uint64_t idx) const {
    if (idx == alphabet.size()) return Payload::synchro();
    return alphabet.at(idx);
  }
};

Ctx make_ctx(const ExploreParams& params) {
  if (params.c != 1)
    throw std::invalid_argument("exhaustive exploration supports c=1 only");
  if (params.alphabet_size < 1 || params.alphabet_size > 2)
    throw std::invalid_argument("exhaustive exploration supports alphabet sizes 1 and 2");
  if (params.script_len < 0 || params.script_len > 2)
    throw std::invalid_argument("exhaustive exploration supports script lengths up to 2");
  if (params.script_len > params.alphabet_size)
    throw std::invalid_argument("script payloads are distinct; need script length <= alphabet size");
  Ctx ctx;
  ctx.params = params;
  ctx.config = ProtocolConfig::standard(params.c);
  if (params.ack_threshold_override > 0) {
    if (params.ack_threshold_override > 8)
      throw std::invalid_argument("ack threshold override too large to pack");
    ctx.config.ack_threshold = params.ack_threshold_override;
  }
  ctx.alphabet = default_alphabet(static_cast<size_t>(params.alphabet_size));
  ctx.script.assign(ctx.alphabet.begin(), ctx.alphabet.begin() + params.script_len);
  return ctx;
}

uint64_t encode_packet(const Ctx& ctx, const Packet& p) {
  return (p.dir == PacketDir::Ack ? 1ULL : 0ULL) | field(ctx.payload_index(p.payload), 1) |
         field(p.ab ? 1 : 0, 3);
}

Packet decode_packet(const Ctx& ctx, uint64_t bits) {
  Packet p;
  p.dir = (bits & 1) ? PacketDir::Ack : PacketDir::Msg;
  p.payload = ctx.payload_at(get(bits, 1, 2));
  p.ab = get(bits, 3, 1) != 0;
  return p;
}

uint64_t encode(const Ctx& ctx, const World& w, const Summary& s) {
  uint64_t v = field(1, kTagOff);
  v |= field(static_cast<uint64_t>(w.sender.phase), kPhaseOff);
  v |= field(w.sender.ab ? 1 : 0, kSenderAbOff);
  if (w.sender.phase != SenderPhase::Idle) {
    v |= field(ctx.payload_index(w.sender.pending), kPendingOff);
    v |= field(static_cast<uint64_t>(w.sender.ack_count), kAckOff);
  }
  v |= field(w.receiver.last_delivered ? 1 : 0, kLastOff);
  const auto& q = w.receiver.queue.entries;
  if (q.size() > 2) throw std::logic_error("queue too long to pack");
  v |= field(q.size(), kQLenOff);
  const int qoffs[2] = {kQE0Off, kQE1Off};
  for (size_t i = 0; i < q.size(); ++i) {
    const uint64_t e = ctx.payload_index(q[i].payload) | field(q[i].ab ? 1 : 0, 2) |
                       field(static_cast<uint64_t>(q[i].count - 1), 3);
    v |= field(e, qoffs[i]);
  }
  if (w.chan_ij.in_flight.size() > 1 || w.chan_ji.in_flight.size() > 1)
    throw std::logic_error("channel too full to pack");
  if (!w.chan_ij.in_flight.empty()) {
    v |= field(1, kIjLenOff);
    v |= field(encode_packet(ctx, w.chan_ij.in_flight[0]), kIjPktOff);
  }
  if (!w.chan_ji.in_flight.empty()) {
    v |= field(1, kJiLenOff);
    v |= field(encode_packet(ctx, w.chan_ji.in_flight[0]), kJiPktOff);
  }
  v |= field(w.script_pos, kScriptPosOff);
  v |= field(s.matched, kMatchedOff);
  if (s.synth) {
    v |= field(1, kSynthOff);
    v |= field(s.synth_payload, kSynthPayloadOff);
  }
  v |= field(s.ndeliv, kNDelivOff);
  v |= field(s.seq, kSeqOff);
  return v;
}

void decode(const Ctx& ctx, uint64_t v, World& w, Summary& s) {
  w.protocol = ctx.params.protocol;
  w.config = ctx.config;
  w.script = ctx.script;
  w.sender = SenderState{};
  w.sender.phase = static_cast<SenderPhase>(get(v, kPhaseOff, 2));
  w.sender.ab = get(v, kSenderAbOff, 1) != 0;
  if (w.sender.phase != SenderPhase::Idle) {
    w.sender.pending = ctx.payload_at(get(v, kPendingOff, 1));
    w.sender.ack_count = static_cast<int>(get(v, kAckOff, 3));
  }
  w.receiver = ReceiverState{};
  w.receiver.last_delivered = get(v, kLastOff, 1) != 0;
  const uint64_t qlen = get(v, kQLenOff, 2);
  const int qoffs[2] = {kQE0Off, kQE1Off};
  for (uint64_t i = 0; i < qlen; ++i) {
    const uint64_t bits = get(v, qoffs[i], 4);
    QueueEntry e;
    e.payload = ctx.payload_at(bits & 3);
    e.ab = get(bits, 2, 1) != 0;
    e.count = static_cast<int>(get(bits, 3, 1)) + 1;
    w.receiver.queue.entries.push_back(std::move(e));
  }
  w.chan_ij = Channel{ChannelId::IJ, ctx.config.c, {}};
  w.chan_ji = Channel{ChannelId::JI, ctx.config.c, {}};
  if (get(v, kIjLenOff, 1))
    w.chan_ij.in_flight.push_back(decode_packet(ctx, get(v, kIjPktOff, 4)));
  if (get(v, kJiLenOff, 1))
    w.chan_ji.in_flight.push_back(decode_packet(ctx, get(v, kJiPktOff, 4)));
  w.script_pos = get(v, kScriptPosOff, 2);

  s = Summary{};
  s.matched = get(v, kMatchedOff, 3);
  s.synth = get(v, kSynthOff, 1) != 0;
  s.synth_payload = get(v, kSynthPayloadOff, 1);
  s.ndeliv = get(v, kNDelivOff, 3);
  s.seq = get(v, kSeqOff, 4);
}

// Flipping every alternating bit in a state is a protocol automorphism;
// the canonical form is the smaller of a state and its flipped twin.
uint64_t flip_bits(uint64_t v) {
  uint64_t f = v ^ (1ULL << kSenderAbOff) ^ (1ULL << kLastOff);
  const uint64_t qlen = get(v, kQLenOff, 2);
  if (qlen >= 1) f ^= 1ULL << (kQE0Off + 2);
  if (qlen >= 2) f ^= 1ULL << (kQE1Off + 2);
  if (get(v, kIjLenOff, 1)) f ^= 1ULL << (kIjPktOff + 3);
  if (get(v, kJiLenOff, 1)) f ^= 1ULL << (kJiPktOff + 3);
  return f;
}

uint64_t canonical(uint64_t v) { return std::min(v, flip_bits(v)); }

// Open-addressing set of packed states; zero marks an empty slot.
class U64Set {
 public:
  explicit U64Set(size_t initial_slots = size_t{1} << 20) {
    size_t n = 1;
    while (n < initial_slots) n <<= 1;
    slots_.assign(n, 0);
  }

  bool insert(uint64_t key) {
    if ((count_ + 1) * 2 > slots_.size()) grow();
    size_t i = index_of(key);
    while (slots_[i] != 0) {
      if (slots_[i] == key) return false;
      i = (i + 1) & (slots_.size() - 1);
    }
    slots_[i] = key;
    ++count_;
    return true;
  }

  size_t size() const { return count_; }

 private:
  size_t index_of(uint64_t key) const {
    uint64_t h = key * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    return static_cast<size_t>(h) & (slots_.size() - 1);
  }

  void grow() {
    std::vector<uint64_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, 0);
    count_ = 0;
    for (uint64_t k : old)
      if (k != 0) insert(k);
  }

  std::vector<uint64_t> slots_;
  size_t count_ = 0;
};

struct Judgement {
  bool violation = false;
  const char* metric = "";
  uint64_t position = 0;
};

// Final per-position verdicts implied by a summary, mirroring the run
// classifier: within each payload the reserved sends belong to the latest
// deliveries in order, the leading surplus is duplicate (if the payload is
// ever sent) or phantom, and a delivery is reordered when a later one
// carries an earlier send.
struct Resolved {
  uint64_t kind[4] = {kKindNone, kKindNone, kKindNone, kKindNone};
  uint64_t e[4] = {0, 0, 0, 0};  // e+1; 0 = none
  bool reordered[4] = {false, false, false, false};
  Judgement violation;
};

Resolved resolve(const Ctx& ctx, const Summary& s) {
  Resolved r;
  const uint64_t n = std::min<uint64_t>(s.ndeliv, 4);
  for (uint64_t q = 0; q < ctx.alphabet.size() && !r.violation.violation; ++q) {
    uint64_t positions[4];
    uint64_t np = 0;
    for (uint64_t i = 0; i < n; ++i)
      if (get(s.seq, static_cast<int>(i), 1) == q) positions[np++] = i + 1;
    if (np == 0) continue;

    const bool synth_of_q = s.synth && s.synth_payload == q;
    const bool script_of_q = q < ctx.script.size();
    uint64_t reserved[2];
    uint64_t nr = 0;
    if (synth_of_q && (s.matched & 1)) reserved[nr++] = 1;          // e = 0
    if (script_of_q && (s.matched & (2ULL << q))) reserved[nr++] = q + 2;  // e = q+1
    const bool ever_sent = synth_of_q || script_of_q;
    const uint64_t earliest = synth_of_q ? 1 : (script_of_q ? q + 2 : 0);

    const uint64_t surplus = np - nr;
    for (uint64_t j = 0; j < np; ++j) {
      const uint64_t pos = positions[j];
      if (j < surplus) {
        r.kind[pos - 1] = ever_sent ? kKindDup : kKindPhantom;
        r.e[pos - 1] = ever_sent ? earliest : 0;
        if (pos >= 2) {
          r.violation = Judgement{true, ever_sent ? "beta" : "gamma", pos};
          break;
        }
      } else {
        r.kind[pos - 1] = kKindNormal;
        r.e[pos - 1] = reserved[j - surplus];
      }
    }
  }
  if (r.violation.violation) return r;

  for (uint64_t i = 0; i < n; ++i) {
    if (r.e[i] == 0) continue;
    for (uint64_t k = i + 1; k < n; ++k) {
      if (r.e[k] != 0 && r.e[k] < r.e[i]) {
        r.reordered[i] = true;
        if (i + 1 >= 2) r.violation = Judgement{true, "delta", i + 1};
        break;
      }
    }
    if (r.violation.violation) break;
  }
  return r;
}

// Records the delivery in the summary and reserves the latest send already
// made for its payload; the verdicts are re-derived from scratch.
Judgement judge_delivery(const Ctx& ctx, const World& w, Summary& s, const Payload& p) {
  const uint64_t pos = s.ndeliv + 1;
  s.ndeliv = std::min<uint64_t>(s.ndeliv + 1, 5);
  if (pos > 4) {
    // A fifth delivery always exceeds the available sends by two or more.
    return Judgement{true, "beta", pos};
  }
  const uint64_t q = ctx.payload_index(p);
  s.seq |= field(q, static_cast<int>(pos) - 1);

  const bool script_of_q = q < ctx.script.size();
  if (script_of_q && q < w.script_pos && !(s.matched & (2ULL << q)))
    s.matched |= 2ULL << q;  // the script send is the latest eligible
  else if (s.synth && s.synth_payload == q && !(s.matched & 1))
    s.matched |= 1;

  return resolve(ctx, s).violation;
}

std::array<uint64_t, 4> terminal_vector(const Ctx& ctx, const Summary& s) {
  uint64_t alpha = 0;
  for (size_t i = 0; i < ctx.script.size(); ++i)
    if (!(s.matched & (2ULL << i))) alpha = i + 1;
  const Resolved r = resolve(ctx, s);
  uint64_t beta = 0, gamma = 0, delta = 0;
  for (uint64_t i = 0; i < std::min<uint64_t>(s.ndeliv, 4); ++i) {
    if (r.kind[i] == kKindDup) beta = i + 1;
    if (r.kind[i] == kKindPhantom) gamma = i + 1;
    if (r.reordered[i]) delta = i + 1;
  }
  return {alpha, beta, gamma, delta};
}

// One branch: a move plus, when its emission overflows, the victim choice.
struct Branch {
  Move move;
  bool has_victim = false;
  int victim = -1;
  ChannelId victim_chan = ChannelId::IJ;
};

struct Expanded {
  Branch branch;
  World world;
  Summary summary;
  Judgement judgement;
};

std::vector<Move> branch_moves(const World& w) {
  std::vector<Move> moves;
  for (ChannelId id : {ChannelId::IJ, ChannelId::JI}) {
    const Channel& ch = w.channel(id);
    for (int i = 0; i < static_cast<int>(ch.in_flight.size()); ++i) {
      moves.push_back(MoveDeliver{id, i});
      moves.push_back(MoveDrop{id, i});
    }
  }
  if (w.sender.phase != SenderPhase::Idle) moves.push_back(MoveTimer{});
  if (w.sender.phase == SenderPhase::Idle && w.script_pos < w.script.size())
    moves.push_back(MoveSubmit{});
  return moves;
}

Expanded apply_branch(const Ctx& ctx, const World& base, const Summary& sum, const Move& m,
                      int forced_victim, bool* overflow_seen, ChannelId* overflow_chan,
                      int* overflow_size) {
  Expanded ex;
  ex.branch.move = m;
  ex.world = base;
  ex.summary = sum;
  bool consulted = false;
  OverflowChooser chooser = [&](ChannelId chan, const Channel& ch, const Packet&) -> int {
    consulted = true;
    if (overflow_chan) *overflow_chan = chan;
    if (overflow_size) *overflow_size = static_cast<int>(ch.in_flight.size());
    ex.branch.has_victim = true;
    ex.branch.victim = forced_victim;
    ex.branch.victim_chan = chan;
    return forced_victim;
  };
  MoveOutcome out = apply_move(ex.world, m, chooser, nullptr, nullptr);
  if (overflow_seen) *overflow_seen = consulted;
  if (out.delivered_message)
    ex.judgement = judge_delivery(ctx, ex.world, ex.summary, out.delivered_message->payload);
  return ex;
}

// Enumerates every (move, overflow victim) branch out of a state.
std::vector<Expanded> expand(const Ctx& ctx, const World& w, const Summary& s) {
  std::vector<Expanded> out;
  for (const Move& m : branch_moves(w)) {
    bool overflow = false;
    ChannelId chan = ChannelId::IJ;
    int size = 0;
    out.push_back(apply_branch(ctx, w, s, m, -1, &overflow, &chan, &size));
    if (overflow)
      for (int v = 0; v < size; ++v)
        out.push_back(apply_branch(ctx, w, s, m, v, nullptr, nullptr, nullptr));
  }
  return out;
}

std::string describe_state(const Ctx& ctx, uint64_t packed) {
  World w;
  Summary s;
  decode(ctx, packed, w, s);
  std::ostringstream os;
  os << "sender{" << to_string(w.sender.phase) << " ab=" << w.sender.ab;
  if (w.sender.phase != SenderPhase::Idle)
    os << " pending=" << (w.sender.pending.is_synchro() ? "<SYNCHRO>" : w.sender.pending.content)
       << " ack=" << w.sender.ack_count;
  os << "} receiver{last=" << w.receiver.last_delivered << " qlen=" << w.receiver.queue.entries.size()
     << "} ij=" << w.chan_ij.in_flight.size() << " ji=" << w.chan_ji.in_flight.size()
     << " script_pos=" << w.script_pos << " ndeliv=" << s.ndeliv;
  return os.str();
}

std::vector<uint64_t> enumerate_seeds(const Ctx& ctx) {
  std::vector<uint64_t> seeds;
  const int alpha = ctx.params.alphabet_size;
  const int syn = alpha;  // payload index of SYNCHRO
  const bool sdl = ctx.params.protocol == ProtocolKind::Sdl;

  std::vector<SenderState> senders;
  for (bool ab : {false, true}) {
    SenderState idle;
    idle.ab = ab;
    senders.push_back(idle);
    if (ctx.params.clean_only) continue;
    std::vector<SenderPhase> phases = sdl
        ? std::vector<SenderPhase>{SenderPhase::SyncPhase, SenderPhase::DataPhase}
        : std::vector<SenderPhase>{SenderPhase::DataPhase};
    for (SenderPhase ph : phases)
      for (int pay = 0; pay < alpha; ++pay) {
        const int max_ack = sdl ? ctx.config.ack_threshold - 1 : 0;
        for (int ack = 0; ack <= max_ack; ++ack) {
          SenderState st;
          st.ab = ab;
          st.phase = ph;
          st.pending = ctx.alphabet[pay];
          st.ack_count = ack;
          senders.push_back(st);
        }
      }
  }

  std::vector<ReceiverQueue> queues;
  queues.push_back(ReceiverQueue{});
  if (!ctx.params.clean_only) {
    std::vector<QueueEntry> cells;
    for (int pay = 0; pay <= syn; ++pay)
      for (bool ab : {false, true})
        for (int count = 1; count <= ctx.config.c + 1; ++count)
          cells.push_back(QueueEntry{ctx.payload_at(pay), ab, count});
    for (const QueueEntry& e : cells) queues.push_back(ReceiverQueue{{e}});
    for (const QueueEntry& a : cells)
      for (const QueueEntry& b : cells)
        if (!(a.payload == b.payload && a.ab == b.ab)) queues.push_back(ReceiverQueue{{a, b}});
  }

  std::vector<std::vector<Packet>> chans;
  chans.push_back({});
  if (!ctx.params.clean_only) {
    for (PacketDir dir : {PacketDir::Msg, PacketDir::Ack})
      for (int pay = 0; pay <= syn; ++pay)
        for (bool ab : {false, true})
          chans.push_back({Packet{dir, ctx.payload_at(pay), ab}});
  }

  World w;
  w.protocol = ctx.params.protocol;
  w.config = ctx.config;
  w.script = ctx.script;
  for (const SenderState& sender : senders)
    for (bool last : {false, true})
      for (const ReceiverQueue& q : queues)
        for (const auto& ij : chans)
          for (const auto& ji : chans) {
            w.sender = sender;
            w.receiver.last_delivered = last;
            w.receiver.queue = q;
            w.chan_ij = Channel{ChannelId::IJ, ctx.config.c, ij};
            w.chan_ji = Channel{ChannelId::JI, ctx.config.c, ji};
            w.script_pos = 0;
            Summary s;
            if (sender.phase != SenderPhase::Idle) {
              s.synth = true;
              s.synth_payload = ctx.payload_index(sender.pending);
            }
            seeds.push_back(encode(ctx, w, s));
          }
  return seeds;
}

}  // namespace

ExploreReport explore_exhaustive(const ExploreParams& params) {
  const Ctx ctx = make_ctx(params);
  const uint64_t max_states = params.max_states > 0 ? params.max_states : 80'000'000ULL;

  ExploreReport report;
  std::set<std::array<uint64_t, 4>> vectors;
  U64Set visited;
  std::vector<uint64_t> frontier;
  std::vector<uint64_t> next;

  World w;
  Summary s;

  auto note_terminal = [&](const Summary& sum) {
    ++report.terminals;
    const auto vec = terminal_vector(ctx, sum);
    vectors.insert(vec);
    if (vec[0] != 0) {
      ++report.violation_count;
      if (report.violations.size() < 32) {
        ExploreViolation v;
        v.metric = "alpha";
        v.position = vec[0];
        v.detail = "script send never delivered";
        report.violations.push_back(std::move(v));
      }
    }
  };

  for (uint64_t seed : enumerate_seeds(ctx)) {
    ++report.seeds;
    const uint64_t key = canonical(seed);
    if (!visited.insert(key)) continue;
    decode(ctx, seed, w, s);
    if (w.terminated())
      note_terminal(s);
    else
      frontier.push_back(seed);
  }

  uint64_t depth = 0;
  bool capped = false;
  while (!frontier.empty() && !capped) {
    if (params.depth_limit > 0 && depth >= params.depth_limit) {
      report.depth_exhausted += frontier.size();
      report.complete = false;
      break;
    }
    next.clear();
    for (uint64_t packed : frontier) {
      decode(ctx, packed, w, s);
      for (Expanded& ex : expand(ctx, w, s)) {
        ++report.edges;
        if (ex.judgement.violation) {
          ++report.violation_count;
          if (report.violations.size() < 32) {
            ExploreViolation v;
            v.metric = ex.judgement.metric;
            v.position = ex.judgement.position;
            v.detail = "via " + to_string(ex.branch.move) + " from " + describe_state(ctx, packed);
            report.violations.push_back(std::move(v));
          }
          continue;
        }
        const uint64_t enc = encode(ctx, ex.world, ex.summary);
        if (!visited.insert(canonical(enc))) continue;
        if (visited.size() > max_states) {
          report.complete = false;
          capped = true;
          break;
        }
        if (ex.world.terminated())
          note_terminal(ex.summary);
        else
          next.push_back(enc);
      }
      if (capped) break;
    }
    frontier.swap(next);
    ++depth;
  }

  report.states = visited.size();
  report.vectors.assign(vectors.begin(), vectors.end());
  return report;
}

ExploreWalk explore_check_walk(const ExploreParams& params, uint64_t seed) {
  const Ctx ctx = make_ctx(params);
  Rng rng(seed);

  // Sample one arbitrary starting point within the explorer's domain.
  World w;
  w.protocol = params.protocol;
  w.config = ctx.config;
  w.script = ctx.script;
  w.sender.ab = rng.uniform(2) == 1;
  const uint64_t nphases = params.protocol == ProtocolKind::Sdl ? 3 : 2;
  switch (rng.uniform(nphases)) {
    case 1: w.sender.phase = SenderPhase::DataPhase; break;
    case 2: w.sender.phase = SenderPhase::SyncPhase; break;
    default: break;
  }
  if (w.sender.phase != SenderPhase::Idle) {
    w.sender.pending = ctx.alphabet[rng.uniform(ctx.alphabet.size())];
    if (params.protocol == ProtocolKind::Sdl)
      w.sender.ack_count = static_cast<int>(rng.uniform(ctx.config.ack_threshold));
  }
  w.receiver.last_delivered = rng.uniform(2) == 1;
  const uint64_t qlen = rng.uniform(3);
  for (uint64_t i = 0; i < qlen; ++i) {
    QueueEntry e;
    for (int tries = 0; tries < 16; ++tries) {
      e.payload = ctx.payload_at(rng.uniform(ctx.alphabet.size() + 1));
      e.ab = rng.uniform(2) == 1;
      bool dup = false;
      for (const QueueEntry& o : w.receiver.queue.entries)
        if (o.payload == e.payload && o.ab == e.ab) dup = true;
      if (!dup) break;
    }
    bool dup = false;
    for (const QueueEntry& o : w.receiver.queue.entries)
      if (o.payload == e.payload && o.ab == e.ab) dup = true;
    if (dup) continue;
    e.count = 1 + static_cast<int>(rng.uniform(2));
    w.receiver.queue.entries.push_back(e);
  }
  for (Channel* ch : {&w.chan_ij, &w.chan_ji}) {
    ch->capacity = ctx.config.c;
    if (rng.uniform(2) == 1) {
      Packet p;
      p.dir = rng.uniform(2) == 1 ? PacketDir::Ack : PacketDir::Msg;
      p.payload = ctx.payload_at(rng.uniform(ctx.alphabet.size() + 1));
      p.ab = rng.uniform(2) == 1;
      ch->in_flight.push_back(p);
    }
  }
  w.chan_ij.id = ChannelId::IJ;
  w.chan_ji.id = ChannelId::JI;

  ExploreWalk walk;
  walk.scenario.config.protocol = params.protocol;
  walk.scenario.config.config = ctx.config;
  walk.scenario.config.sender = w.sender;
  walk.scenario.config.receiver = w.receiver;
  walk.scenario.config.chan_ij = w.chan_ij;
  walk.scenario.config.chan_ji = w.chan_ji;
  walk.scenario.config.script = ctx.script;
  walk.scenario.note = "random exploration walk";

  Summary s;
  if (w.sender.phase != SenderPhase::Idle) {
    s.synth = true;
    s.synth_payload = ctx.payload_index(w.sender.pending);
  }

  for (int step = 0; step < 20000 && !w.terminated(); ++step) {
    std::vector<Move> moves = branch_moves(w);
    // Bias toward progress so most walks terminate: drops are rare.
    std::vector<int> weights;
    int total = 0;
    for (const Move& m : moves) {
      int wgt = std::holds_alternative<MoveDrop>(m) ? 1 : 8;
      weights.push_back(wgt);
      total += wgt;
    }
    int pick = static_cast<int>(rng.uniform(static_cast<uint64_t>(total)));
    size_t mi = 0;
    while (pick >= weights[mi]) pick -= weights[mi++];

    bool overflow = false;
    ChannelId chan = ChannelId::IJ;
    int size = 0;
    Expanded ex = apply_branch(ctx, w, s, moves[mi], -1, &overflow, &chan, &size);
    if (overflow && rng.uniform(static_cast<uint64_t>(size) + 1) > 0) {
      const int victim = static_cast<int>(rng.uniform(static_cast<uint64_t>(size)));
      ex = apply_branch(ctx, w, s, moves[mi], victim, nullptr, nullptr, nullptr);
    }
    if (ex.judgement.violation) break;  // cannot track past a violation; stop here

    // Round-trip check: the packed encoding must be lossless.
    World rt_w;
    Summary rt_s;
    decode(ctx, encode(ctx, ex.world, ex.summary), rt_w, rt_s);
    if (!(rt_s == ex.summary) || !(rt_w.sender == ex.world.sender) ||
        !(rt_w.receiver == ex.world.receiver) || !(rt_w.chan_ij == ex.world.chan_ij) ||
        !(rt_w.chan_ji == ex.world.chan_ji) || rt_w.script_pos != ex.world.script_pos)
      throw std::logic_error("packed state round-trip mismatch");

    walk.scenario.replay.push_back(ex.branch.move);
    if (ex.branch.has_victim)
      walk.scenario.replay.push_back(OverflowChoice{ex.branch.victim_chan, ex.branch.victim});
    w = std::move(ex.world);
    s = ex.summary;
  }

  walk.terminated = w.terminated();
  walk.vector = terminal_vector(ctx, s);
  if (!walk.terminated) {
    // Alpha over submitted sends only, mirroring the run classifier.
    walk.vector[0] = 0;
    for (size_t i = 0; i < w.script_pos; ++i)
      if (!(s.matched & (1ULL << (i + 1)))) walk.vector[0] = i + 1;
  }
  return walk;
}

}  // namespace sdl
