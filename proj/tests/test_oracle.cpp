#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sdl/explore.hpp"
#include "sdl/oracle.hpp"

#include <limits>

using namespace sdl;

namespace {

std::vector<Payload> logp(std::initializer_list<const char*> names) {
  std::vector<Payload> v;
  for (const char* n : names) v.push_back(Payload::data(n));
  return v;
}

RunOutcome run_scenario(const Scenario& s) {
  auto replay = make_replay_adversary(s.replay);
  RunOptions opts;
  opts.referee_enabled = false;
  return run(s.config, *replay, 0, opts);
}

}  // namespace

TEST_CASE("classify: identity run is all normal") {
  const Classification cl = classify(logp({"a", "b"}), logp({"a", "b"}));
  CHECK(cl.count(DeliveryVerdict::Normal) == 2);
  CHECK(cl.observed == ObservedBounds{0, 0, 0, 0});
  CHECK(cl.lost_sends() == 0);
}

TEST_CASE("classify: a second delivery of a once-sent payload is a duplicate") {
  const Classification cl = classify(logp({"a"}), logp({"a", "a"}));
  REQUIRE(cl.deliveries.size() == 2);
  CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Normal);
  CHECK(cl.deliveries[1].verdict == DeliveryVerdict::Duplicate);
  CHECK(cl.observed.beta == 2);
}

TEST_CASE("classify: greedy matching on bare logs, reorder tags the early delivery") {
  // sends m1,m2; deliveries m2,m1,m2
  const Classification cl = classify(logp({"m1", "m2"}), logp({"m2", "m1", "m2"}));
  REQUIRE(cl.deliveries.size() == 3);
  CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Normal);   // matches send m2
  CHECK(cl.deliveries[0].reordered);                            // m1 arrives later
  CHECK(cl.deliveries[1].verdict == DeliveryVerdict::Normal);   // matches send m1
  CHECK(cl.deliveries[2].verdict == DeliveryVerdict::Duplicate);
  CHECK(cl.observed.delta == 1);
  CHECK(cl.observed.beta == 3);
}

TEST_CASE("classify: phantom when the payload was never sent, lost when never delivered") {
  const Classification cl = classify(logp({"a", "b"}), logp({"x", "a"}));
  CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Phantom);
  CHECK(cl.observed.gamma == 1);
  CHECK(cl.lost_sends() == 1);
  CHECK(cl.observed.alpha == 2);  // send "b" is the second script send
}

TEST_CASE("classify partitions deliveries and sends") {
  const Classification cl = classify(logp({"a", "b", "c"}), logp({"x", "a", "a", "c"}));
  CHECK(cl.count(DeliveryVerdict::Normal) + cl.count(DeliveryVerdict::Duplicate) +
            cl.count(DeliveryVerdict::Phantom) ==
        cl.deliveries.size());
  uint64_t delivered = 0;
  for (bool b : cl.script_delivered) delivered += b ? 1 : 0;
  CHECK(delivered + cl.lost_sends() == cl.script_delivered.size());
}

TEST_CASE("check_bounds: positional prefix rule") {
  Classification cl;
  cl.observed = ObservedBounds{0, 0, 0, 0};
  CHECK(check_bounds(cl, BoundSpec{0, 1, 1, 1}).pass);

  cl.observed = ObservedBounds{0, 0, 1, 0};  // first delivery may be a phantom
  CHECK(check_bounds(cl, BoundSpec{0, 1, 1, 1}).pass);

  cl.observed = ObservedBounds{0, 0, 2, 0};
  cl.deliveries.push_back(ClassifiedDelivery{Payload::data("x"), 1, DeliveryVerdict::Normal, false, 1});
  cl.deliveries.push_back(ClassifiedDelivery{Payload::data("y"), 2, DeliveryVerdict::Phantom, false, {}});
  const BoundCheck bad = check_bounds(cl, BoundSpec{0, 1, 1, 1});
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].metric == "gamma");
  REQUIRE(bad.violations[0].offending_positions.size() == 1);
  CHECK(bad.violations[0].offending_positions[0] == 2);
}

TEST_CASE("check_bounds: permissive spec always passes, monotone in the spec") {
  const uint64_t inf = std::numeric_limits<uint64_t>::max();
  for (uint64_t a = 0; a < 3; ++a)
    for (uint64_t b = 0; b < 3; ++b) {
      Classification cl;
      cl.observed = ObservedBounds{a, b, a, b};
      CHECK(check_bounds(cl, BoundSpec{inf, inf, inf, inf}).pass);
      if (check_bounds(cl, BoundSpec{1, 1, 1, 1}).pass) {
        CHECK(check_bounds(cl, BoundSpec{2, 2, 2, 2}).pass);
      }
    }
}

TEST_CASE("classify_run: pre-run pending sends explain later deliveries") {
  // A corrupted mid-send start delivers its pending payload before any
  // submission; the delivery is normal, not a phantom.
  RunOutcome out;
  out.terminated = true;
  out.synthetic_send = SendRecord{Payload::data("g"), 0, true};
  out.delivery_log = {DeliveryRecord{Payload::data("g"), true, 5}};
  const Classification cl = classify_run(out);
  REQUIRE(cl.deliveries.size() == 1);
  CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Normal);
  CHECK(cl.observed == ObservedBounds{0, 0, 0, 0});
}

TEST_CASE("classify_run: a lost pending send is exempt from loss accounting") {
  RunOutcome out;
  out.terminated = true;
  out.synthetic_send = SendRecord{Payload::data("g"), 0, true};
  out.send_log = {SendRecord{Payload::data("a"), 10, false}};
  out.delivery_log = {DeliveryRecord{Payload::data("a"), true, 20}};
  const Classification cl = classify_run(out);
  CHECK(cl.observed.alpha == 0);
  CHECK(cl.lost_sends() == 0);
}

TEST_CASE("classify_run: script sends are preferred over the pending send") {
  // Pending equals the scripted payload and the only delivery happens after
  // the submission: the script send must not be reported lost.
  RunOutcome out;
  out.terminated = true;
  out.synthetic_send = SendRecord{Payload::data("a"), 0, true};
  out.send_log = {SendRecord{Payload::data("a"), 10, false}};
  out.delivery_log = {DeliveryRecord{Payload::data("a"), true, 20}};
  const Classification cl = classify_run(out);
  CHECK(cl.observed.alpha == 0);
}

TEST_CASE("classify_run: a delivery before its send is a duplicate of it") {
  RunOutcome out;
  out.terminated = true;
  out.send_log = {SendRecord{Payload::data("a"), 10, false}};
  out.delivery_log = {DeliveryRecord{Payload::data("a"), true, 5},
                      DeliveryRecord{Payload::data("a"), false, 20}};
  const Classification cl = classify_run(out);
  REQUIRE(cl.deliveries.size() == 2);
  CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Duplicate);
  CHECK(cl.deliveries[1].verdict == DeliveryVerdict::Normal);
  CHECK(cl.observed.beta == 1);
}

TEST_CASE("witness_phantom yields exactly one phantom, at position 1") {
  for (int c : {1, 2}) {
    const Scenario s = witness_phantom(c);
    const RunOutcome out = run_scenario(s);
    REQUIRE(out.terminated);
    const Classification cl = classify_run(out);
    CHECK(cl.observed.gamma == 1);
    CHECK(cl.observed.beta == 0);
    CHECK(cl.observed.delta == 0);
    CHECK(cl.observed.alpha == 0);
    CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Phantom);
    // Passes the headline bound, fails a zero-phantom bound at position 1.
    CHECK(check_bounds(cl, BoundSpec{0, 1, 1, 1}).pass);
    CHECK_FALSE(check_bounds(cl, BoundSpec{0, 1, 0, 1}).pass);
  }
}

TEST_CASE("witness_duplicate yields exactly one duplicate, at position 1") {
  for (int c : {1, 2}) {
    const Scenario s = witness_duplicate(c);
    const RunOutcome out = run_scenario(s);
    REQUIRE(out.terminated);
    const Classification cl = classify_run(out);
    CHECK(cl.observed.beta == 1);
    CHECK(cl.observed.gamma == 0);
    CHECK(cl.observed.delta == 0);
    CHECK(cl.observed.alpha == 0);
    CHECK(cl.deliveries[0].verdict == DeliveryVerdict::Duplicate);
    CHECK(check_bounds(cl, BoundSpec{0, 1, 1, 1}).pass);
  }
}

TEST_CASE("witness_reorder yields exactly one reordered delivery, at position 1") {
  for (int c : {1, 2}) {
    const Scenario s = witness_reorder(c);
    const RunOutcome out = run_scenario(s);
    REQUIRE(out.terminated);
    const Classification cl = classify_run(out);
    CHECK(cl.observed.delta == 1);
    CHECK(cl.observed.alpha == 0);
    CHECK(cl.deliveries[0].reordered);
    CHECK(check_bounds(cl, BoundSpec{0, 1, 1, 1}).pass);
  }
}

TEST_CASE("scenario files round-trip") {
  const Scenario s = witness_reorder(1);
  const std::string text = scenario_to_json(s);
  const Scenario back = scenario_from_json(text);
  CHECK(back.config.script == s.config.script);
  CHECK(back.config.receiver == s.config.receiver);
  CHECK(back.config.chan_ij == s.config.chan_ij);
  CHECK(back.replay.size() == s.replay.size());
  const RunOutcome a = run_scenario(s);
  const RunOutcome b = run_scenario(back);
  CHECK(a.delivery_log == b.delivery_log);
}

TEST_CASE("overhead: clean single-message run emits at least 2(3c+2) packets") {
  GlobalConfiguration cfg = clean_configuration(ProtocolKind::Sdl, 1, {Payload::data("a")});
  auto adv = make_random_adversary(0.0);
  const RunOutcome out = run(cfg, *adv, 3);
  REQUIRE(out.terminated);
  const OverheadReport r = overhead(out);
  CHECK(r.defined);
  CHECK(r.msg_emits_ij >= 10);
  CHECK(r.steps_to_first_normal_delivery.has_value());
}

TEST_CASE("overhead: undefined on an empty run") {
  GlobalConfiguration cfg = clean_configuration(ProtocolKind::Sdl, 1, {});
  auto adv = make_random_adversary(0.0);
  const OverheadReport r = overhead(run(cfg, *adv, 3));
  CHECK_FALSE(r.defined);
}

TEST_CASE("overhead grows with the channel capacity") {
  // Measured under the drain schedule, where every emission is delivered and
  // acked: exactly one emission per expected ack, 2(3c+2) per message.
  double prev = 0.0;
  for (int c : {1, 2, 3}) {
    GlobalConfiguration cfg = clean_configuration(ProtocolKind::Sdl, c, {Payload::data("a")});
    auto adv = make_eager_adversary();
    const RunOutcome out = run(cfg, *adv, 5);
    REQUIRE(out.terminated);
    const OverheadReport r = overhead(out);
    CHECK(r.msg_emits_ij == static_cast<uint64_t>(2 * (3 * c + 2)));
    CHECK(r.msg_emits_per_delivery > prev);
    prev = r.msg_emits_per_delivery;
  }
}

TEST_CASE("baseline separation witness: abp loses, sdl does not") {
  const Scenario s = witness_abp_loss(1);
  const RunOutcome abp_out = run_scenario(s);
  REQUIRE(abp_out.terminated);
  const Classification abp_cl = classify_run(abp_out);
  CHECK(abp_cl.observed.alpha == 1);
  CHECK_FALSE(check_bounds(abp_cl, BoundSpec{0, 1, 1, 1}).pass);

  GlobalConfiguration sdl_cfg = s.config;
  sdl_cfg.protocol = ProtocolKind::Sdl;
  auto eager = make_eager_adversary();
  const RunOutcome sdl_out = run(sdl_cfg, *eager, 0);
  REQUIRE(sdl_out.terminated);
  CHECK(check_bounds(classify_run(sdl_out), BoundSpec{0, 1, 1, 1}).pass);
  REQUIRE(sdl_out.delivery_log.size() == 1);
  CHECK(sdl_out.delivery_log[0].payload == Payload::data("a"));
}
