#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sdl/harness.hpp"
#include "sdl/scenario.hpp"

namespace sdl {

// Bounded exhaustive exploration of every adversary decision and event
// interleaving from every arbitrary initial configuration, for tiny
// instances. States are packed into 64 bits together with the
// classification summary needed to judge each delivery online.
struct ExploreParams {
  ProtocolKind protocol = ProtocolKind::Sdl;
  int c = 1;             // only c=1 is tractable
  int alphabet_size = 1; // <= 2
  int script_len = 1;    // <= alphabet_size (distinct payloads)
  bool clean_only = false;
  uint64_t depth_limit = 0;  // 0: unlimited
  uint64_t max_states = 0;   // 0: default cap
  int ack_threshold_override = 0;  // 0: standard 3c+2; mutation hook for tests
};

struct ExploreViolation {
  std::string metric;     // alpha | beta | gamma | delta
  uint64_t position = 0;  // delivery position (or send index for alpha)
  std::string detail;
};

struct ExploreReport {
  uint64_t seeds = 0;
  uint64_t states = 0;
  uint64_t edges = 0;
  uint64_t terminals = 0;
  uint64_t depth_exhausted = 0;
  bool complete = true;  // false when a cap stopped the search
  // Observed (alpha, beta, gamma, delta) vectors over terminated executions.
  std::vector<std::array<uint64_t, 4>> vectors;
  uint64_t violation_count = 0;  // deliveries/losses beyond the first position
  std::vector<ExploreViolation> violations;  // capped sample
};

// Throws std::invalid_argument when params exceed the tractable bounds.
ExploreReport explore_exhaustive(const ExploreParams& params);

// One random branch walk through the packed transition system, returned as a
// replayable scenario along with the walk's own classification verdict.
// Used to cross-check the explorer against the simulation engine.
struct ExploreWalk {
  Scenario scenario;
  bool terminated = false;
  std::array<uint64_t, 4> vector{0, 0, 0, 0};
};

ExploreWalk explore_check_walk(const ExploreParams& params, uint64_t seed);

}  // namespace sdl
