#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sdl/explore.hpp"
#include "sdl/oracle.hpp"

using namespace sdl;

TEST_CASE("explorer rejects intractable parameters") {
  ExploreParams p;
  p.c = 2;
  CHECK_THROWS_AS(explore_exhaustive(p), std::invalid_argument);
  p = ExploreParams{};
  p.alphabet_size = 3;
  CHECK_THROWS_AS(explore_exhaustive(p), std::invalid_argument);
  p = ExploreParams{};
  p.alphabet_size = 1;
  p.script_len = 2;  // distinct payloads impossible
  CHECK_THROWS_AS(explore_exhaustive(p), std::invalid_argument);
}

TEST_CASE("clean starts reach only the identity outcome") {
  ExploreParams p;
  p.clean_only = true;
  p.alphabet_size = 1;
  p.script_len = 1;
  const ExploreReport r = explore_exhaustive(p);
  CHECK(r.complete);
  CHECK(r.violation_count == 0);
  REQUIRE(r.vectors.size() == 1);
  CHECK(r.vectors[0] == std::array<uint64_t, 4>{0, 0, 0, 0});
  CHECK(r.seeds == 4);
  CHECK(r.terminals > 0);
}

TEST_CASE("clean starts with two messages still classify as identity") {
  ExploreParams p;
  p.clean_only = true;
  p.alphabet_size = 2;
  p.script_len = 2;
  const ExploreReport r = explore_exhaustive(p);
  CHECK(r.complete);
  CHECK(r.violation_count == 0);
  REQUIRE(r.vectors.size() == 1);
  CHECK(r.vectors[0] == std::array<uint64_t, 4>{0, 0, 0, 0});
}

TEST_CASE("smallest arbitrary-start instance meets the stabilization bound") {
  ExploreParams p;
  p.alphabet_size = 1;
  p.script_len = 1;
  const ExploreReport r = explore_exhaustive(p);
  CHECK(r.complete);
  CHECK(r.violation_count == 0);
  CHECK(r.vectors.size() >= 2);  // at least the identity and one corrupted-start outcome
  for (const auto& v : r.vectors) {
    CHECK(v[0] == 0);
    CHECK(v[1] <= 1);
    CHECK(v[2] <= 1);
    CHECK(v[3] <= 1);
  }
}

TEST_CASE("depth limit exhaustion is reported") {
  ExploreParams p;
  p.alphabet_size = 1;
  p.script_len = 1;
  p.depth_limit = 3;
  const ExploreReport r = explore_exhaustive(p);
  CHECK_FALSE(r.complete);
  CHECK(r.depth_exhausted > 0);
}

TEST_CASE("explorer walks replay identically through the simulation engine") {
  ExploreParams p;
  p.alphabet_size = 2;
  p.script_len = 2;
  int terminated_walks = 0;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    const ExploreWalk walk = explore_check_walk(p, seed);
    auto replay = make_replay_adversary(walk.scenario.replay);
    RunOptions opts;
    opts.referee_enabled = false;
    const RunOutcome out = run(walk.scenario.config, *replay, 0, opts);
    CHECK(out.terminated == walk.terminated);
    const Classification cl = classify_run(out);
    CHECK(cl.observed.alpha == walk.vector[0]);
    CHECK(cl.observed.beta == (walk.vector[1] ? 1u : 0u));
    CHECK(cl.observed.gamma == (walk.vector[2] ? 1u : 0u));
    CHECK((cl.observed.delta != 0) == (walk.vector[3] != 0));
    if (walk.terminated) ++terminated_walks;
  }
  CHECK(terminated_walks > 10);
}
