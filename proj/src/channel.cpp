#include "sdl/channel.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdl {

ChannelSendOutcome channel_send(Channel& ch, const Packet& pkt, int victim_index) {
  ChannelSendOutcome out;
  if (!ch.full()) {
    ch.in_flight.push_back(pkt);
    out.stored = true;
    return out;
  }
  out.overflow = true;
  out.victim_index = victim_index;
  if (victim_index < 0) {
    out.lost = pkt;
    return out;
  }
  if (victim_index >= static_cast<int>(ch.in_flight.size()))
    throw std::out_of_range("overflow victim index out of range");
  out.lost = ch.in_flight[victim_index];
  ch.in_flight.erase(ch.in_flight.begin() + victim_index);
  ch.in_flight.push_back(pkt);
  out.stored = true;
  return out;
}

Packet channel_take(Channel& ch, int index) {
  if (index < 0 || index >= static_cast<int>(ch.in_flight.size()))
    throw std::out_of_range("channel index out of range");
  Packet p = ch.in_flight[index];
  ch.in_flight.erase(ch.in_flight.begin() + index);
  return p;
}

Channel channel_init_arbitrary(Rng& rng, ChannelId id, int c, const std::vector<Payload>& alphabet) {
  if (c < 1) throw std::invalid_argument("capacity must be >= 1");
  Channel ch;
  ch.id = id;
  ch.capacity = c;
  const uint64_t count = rng.uniform(static_cast<uint64_t>(c) + 1);
  for (uint64_t i = 0; i < count; ++i) {
    Packet p;
    p.dir = rng.uniform(2) == 0 ? PacketDir::Msg : PacketDir::Ack;
    const uint64_t pick = rng.uniform(alphabet.size() + 1);
    p.payload = pick == alphabet.size() ? Payload::synchro() : alphabet[pick];
    p.ab = rng.uniform(2) == 1;
    ch.in_flight.push_back(std::move(p));
  }
  return ch;
}

int FairnessReferee::forced_delivery_index(const Channel& ch) const {
  int best = -1;
  int best_denials = budget_ - 1;
  for (int i = 0; i < static_cast<int>(ch.in_flight.size()); ++i) {
    auto it = denials_.find(class_of(ch.in_flight[i]));
    if (it != denials_.end() && it->second > best_denials) {
      best = i;
      best_denials = it->second;
    }
  }
  return best;
}

void FairnessReferee::note_step(const std::vector<PacketClass>& present_at_start,
                                const PacketClass* delivered) {
  std::vector<PacketClass> seen;
  for (const PacketClass& cls : present_at_start) {
    if (std::find(seen.begin(), seen.end(), cls) != seen.end()) continue;
    seen.push_back(cls);
    if (delivered && cls == *delivered) {
      denials_.erase(cls);
      continue;
    }
    int& n = denials_[cls];
    ++n;
    max_streak_ = std::max(max_streak_, n);
  }
}

void FairnessReferee::note_overflow_loss(const PacketClass& cls) {
  int& n = denials_[cls];
  ++n;
  max_streak_ = std::max(max_streak_, n);
}

int FairnessReferee::override_overflow_victim(const Channel& ch, const Packet& incoming,
                                              int victim_index) const {
  if (victim_index >= 0) return victim_index;
  auto it = denials_.find(class_of(incoming));
  if (it == denials_.end() || it->second < budget_) return victim_index;
  const PacketClass cls = class_of(incoming);
  for (int i = 0; i < static_cast<int>(ch.in_flight.size()); ++i)
    if (class_of(ch.in_flight[i]) != cls) return i;
  return victim_index;  // channel holds only this class; losing the copy is harmless
}

}  // namespace sdl
