#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdl/harness.hpp"
#include "sdl/scenario.hpp"
#include "sdl/trace.hpp"

namespace sdl {

enum class DeliveryVerdict : uint8_t { Normal, Duplicate, Phantom };

const char* to_string(DeliveryVerdict v);

struct ClassifiedDelivery {
  Payload payload;
  uint64_t position = 0;  // 1-based delivery position
  DeliveryVerdict verdict = DeliveryVerdict::Normal;
  bool reordered = false;
  // Index into the send list for matched deliveries; for duplicates, the
  // send they repeat. 0 is the pre-run synthetic send, script sends are 1-based.
  std::optional<int> effective_send;
};

struct ObservedBounds {
  uint64_t alpha = 0;  // position of the last lost script send
  uint64_t beta = 0;   // position of the last duplicate delivery
  uint64_t gamma = 0;  // position of the last phantom delivery
  uint64_t delta = 0;  // position of the last reordered delivery

  friend bool operator==(const ObservedBounds&, const ObservedBounds&) = default;
};

struct Classification {
  std::vector<ClassifiedDelivery> deliveries;
  std::vector<bool> script_delivered;  // one flag per script send
  ObservedBounds observed;

  uint64_t count(DeliveryVerdict v) const;
  uint64_t lost_sends() const;
};

// Greedy content matching over bare logs: each delivery takes the earliest
// unmatched send with equal payload, with no ordering information.
Classification classify(const std::vector<Payload>& send_log,
                        const std::vector<Payload>& delivery_log);

// Classification of a finished run. Uses the logs' step stamps: a delivery
// can only match a send that happened before it, and a corrupted mid-send
// pending payload counts as a send that predates the run (it can match
// deliveries but is exempt from loss accounting).
Classification classify_run(const RunOutcome& outcome);

struct BoundSpec {
  uint64_t alpha = 0;
  uint64_t beta = 0;
  uint64_t gamma = 0;
  uint64_t delta = 0;

  friend bool operator==(const BoundSpec&, const BoundSpec&) = default;
};

struct BoundViolation {
  std::string metric;  // "alpha" | "beta" | "gamma" | "delta"
  uint64_t observed = 0;
  uint64_t allowed = 0;
  std::vector<uint64_t> offending_positions;  // positions beyond the allowed prefix
};

struct BoundCheck {
  bool pass = true;
  std::vector<BoundViolation> violations;
};

BoundCheck check_bounds(const Classification& cl, const BoundSpec& spec);

struct RunVerdict {
  bool pass = true;
  bool liveness_failure = false;
  Classification classification;
  BoundCheck bounds;
};

RunVerdict evaluate_run(const RunOutcome& outcome, const BoundSpec& spec);

struct OverheadReport {
  bool defined = false;  // false when the run delivered nothing
  uint64_t msg_emits_ij = 0;
  uint64_t ack_emits_ji = 0;
  uint64_t deliveries = 0;
  double msg_emits_per_delivery = 0.0;
  double ack_emits_per_delivery = 0.0;
  std::optional<uint64_t> steps_to_first_normal_delivery;
};

// Requires a run recorded with tracing on.
OverheadReport overhead(const RunOutcome& outcome);

// Crafted starting points plus recorded adversary schedules realizing each
// lower-bound outcome on the first delivery.
Scenario witness_phantom(int c);
Scenario witness_duplicate(int c);
Scenario witness_reorder(int c);
// Bit-misaligned start under which the alternating-bit baseline loses the
// first message while the queued protocol does not.
Scenario witness_abp_loss(int c);

}  // namespace sdl
