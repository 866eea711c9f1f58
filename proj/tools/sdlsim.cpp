#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sdl/explore.hpp"
#include "sdl/harness.hpp"
#include "sdl/oracle.hpp"
#include "sdl/scenario.hpp"
#include "sdl/trace.hpp"

using namespace sdl;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
  std::string protocol = "sdl";
  int c = 1;
  int script_length = 1;
  int alphabet = 0;  // 0: script_length + 1
  uint64_t seed = 1;
  std::string adversary = "random";
  double p_drop = 0.25;
  int budget = 0;  // 0: 4c
  uint64_t step_limit = 1'000'000;
  std::string check;  // "a,b,g,d"
};

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "sdl") return ProtocolKind::Sdl;
  if (s == "abp") return ProtocolKind::Abp;
  throw std::invalid_argument("protocol must be sdl or abp");
}

std::optional<BoundSpec> parse_check(const std::string& s) {
  if (s.empty()) return std::nullopt;
  BoundSpec b;
  char comma;
  std::istringstream is(s);
  if (!(is >> b.alpha >> comma >> b.beta >> comma >> b.gamma >> comma >> b.delta))
    throw std::invalid_argument("--check expects four comma-separated integers, e.g. 0,1,1,1");
  return b;
}

int effective_alphabet(const CommonOpts& o) {
  const int a = o.alphabet > 0 ? o.alphabet : o.script_length + 1;
  if (a < o.script_length)
    throw std::invalid_argument("alphabet must be >= script length (scripts use distinct payloads)");
  if (a < 1) throw std::invalid_argument("alphabet must be >= 1");
  return a;
}

void validate_common(const CommonOpts& o) {
  if (o.c < 1) throw std::invalid_argument("capacity must be >= 1");
  if (o.script_length < 0) throw std::invalid_argument("script length must be >= 0");
  parse_protocol(o.protocol);
  effective_alphabet(o);
}

std::string bounds_str(const ObservedBounds& b) {
  std::ostringstream os;
  os << "(" << b.alpha << "," << b.beta << "," << b.gamma << "," << b.delta << ")";
  return os.str();
}

std::string failure_reason(const RunVerdict& v) {
  if (v.liveness_failure) return "liveness";
  std::string r = "bounds:";
  for (size_t i = 0; i < v.bounds.violations.size(); ++i) {
    if (i) r += ",";
    r += v.bounds.violations[i].metric;
    r += "@" + std::to_string(v.bounds.violations[i].observed);
  }
  return r;
}

json overhead_json(const OverheadReport& r) {
  json j;
  j["defined"] = r.defined;
  if (r.defined) {
    j["msg_emits_ij"] = r.msg_emits_ij;
    j["ack_emits_ji"] = r.ack_emits_ji;
    j["deliveries"] = r.deliveries;
    j["msg_emits_per_delivery"] = r.msg_emits_per_delivery;
    j["ack_emits_per_delivery"] = r.ack_emits_per_delivery;
    if (r.steps_to_first_normal_delivery)
      j["steps_to_first_normal_delivery"] = *r.steps_to_first_normal_delivery;
  }
  return j;
}

struct RunCmd {
  CommonOpts common;
  std::vector<std::string> init{"clean"};
  uint64_t config_seed = 0;  // 0: same as seed
  std::string trace_path;
  std::string emit_scenario_path;
};

GlobalConfiguration build_configuration(const CommonOpts& o, const std::string& init_kind,
                                        uint64_t config_seed) {
  const ProtocolKind protocol = parse_protocol(o.protocol);
  const int alphabet_size = effective_alphabet(o);
  const std::vector<Payload> alphabet = default_alphabet(static_cast<size_t>(alphabet_size));
  std::vector<Payload> script(alphabet.begin(), alphabet.begin() + o.script_length);
  if (init_kind == "clean") return clean_configuration(protocol, o.c, std::move(script));
  if (init_kind == "arbitrary") {
    Rng rng(config_seed);
    return arbitrary_configuration(rng, protocol, o.c, alphabet, std::move(script));
  }
  throw std::invalid_argument("init must be clean, arbitrary, or scenario <path>");
}

int cmd_run(const RunCmd& cmd) {
  validate_common(cmd.common);
  const auto check = parse_check(cmd.common.check);

  GlobalConfiguration cfg;
  std::unique_ptr<Adversary> adversary;
  RunOptions opts;
  opts.step_limit = cmd.common.step_limit;
  opts.fairness_budget = cmd.common.budget;

  const std::string init_kind = cmd.init.empty() ? "clean" : cmd.init[0];
  if (init_kind == "scenario") {
    if (cmd.init.size() < 2)
      throw std::invalid_argument("--init scenario needs a file: --init scenario <path>");
    Scenario sc = load_scenario(cmd.init[1]);
    cfg = sc.config;
    if (cmd.common.adversary == "replay" || cmd.common.adversary == "random") {
      // Default for scenarios: replay the recorded schedule.
      adversary = make_replay_adversary(sc.replay);
      opts.referee_enabled = false;
    } else {
      adversary = make_adversary(StrategySpec{cmd.common.adversary, cmd.common.p_drop});
    }
  } else {
    const uint64_t config_seed = cmd.config_seed ? cmd.config_seed : cmd.common.seed;
    cfg = build_configuration(cmd.common, init_kind, config_seed);
    if (cmd.common.adversary == "replay")
      throw std::invalid_argument("replay runs need --init scenario <path>");
    adversary = make_adversary(StrategySpec{cmd.common.adversary, cmd.common.p_drop});
  }

  const RunOutcome outcome = run(cfg, *adversary, cmd.common.seed, opts);

  if (!cmd.trace_path.empty()) {
    std::ofstream f(cmd.trace_path);
    if (!f) throw std::invalid_argument("cannot write " + cmd.trace_path);
    write_trace_jsonl(f, outcome.trace);
  }
  if (!cmd.emit_scenario_path.empty()) {
    Scenario sc;
    sc.config = cfg;
    sc.replay = outcome.decisions;
    sc.note = "recorded run";
    save_scenario(sc, cmd.emit_scenario_path);
  }

  const RunVerdict verdict = evaluate_run(outcome, check.value_or(BoundSpec{}));
  const Classification& cl = verdict.classification;

  std::cout << "protocol=" << cmd.common.protocol << " c=" << cmd.common.c
            << " init=" << init_kind << " adversary=" << adversary->name()
            << " seed=" << cmd.common.seed << "\n";
  std::cout << "terminated=" << (outcome.terminated ? "yes" : "no")
            << " steps=" << outcome.steps_used << " sends=" << outcome.send_log.size()
            << " deliveries=" << outcome.delivery_log.size() << "\n";
  std::cout << "observed bounds " << bounds_str(cl.observed) << "  [normal="
            << cl.count(DeliveryVerdict::Normal) << " duplicate="
            << cl.count(DeliveryVerdict::Duplicate) << " phantom="
            << cl.count(DeliveryVerdict::Phantom) << " lost=" << cl.lost_sends() << "]\n";
  const OverheadReport oh = overhead(outcome);
  if (oh.defined)
    std::cout << "overhead msg_emits/delivery=" << oh.msg_emits_per_delivery
              << " ack_emits/delivery=" << oh.ack_emits_per_delivery << "\n";

  if (outcome.liveness_failure) {
    std::cout << "FAIL liveness: step limit " << cmd.common.step_limit
              << " hit before termination\n";
    return kExitPropertyFailure;
  }
  if (check) {
    const BoundCheck bc = check_bounds(cl, *check);
    if (!bc.pass) {
      for (const BoundViolation& v : bc.violations) {
        std::cout << "FAIL " << v.metric << ": observed " << v.observed << " > allowed "
                  << v.allowed << " (positions";
        for (uint64_t p : v.offending_positions) std::cout << " " << p;
        std::cout << ")\n";
      }
      return kExitPropertyFailure;
    }
    std::cout << "PASS bound check\n";
  }
  return kExitPass;
}

struct BatchCmd {
  CommonOpts common;
  std::string init = "arbitrary";
  uint64_t runs = 100;
  int workers = 0;  // 0: env or 1
  std::string out_path;
};

std::string replay_command(const BatchCmd& cmd, uint64_t config_seed, uint64_t run_seed) {
  std::ostringstream os;
  os << "sdlsim run --protocol " << cmd.common.protocol << " --c " << cmd.common.c << " --init "
     << cmd.init << " --script-length " << cmd.common.script_length << " --alphabet "
     << effective_alphabet(cmd.common) << " --adversary " << cmd.common.adversary;
  if (cmd.common.adversary == "random") os << " --p-drop " << cmd.common.p_drop;
  if (cmd.common.budget > 0) os << " --budget " << cmd.common.budget;
  os << " --step-limit " << cmd.common.step_limit << " --config-seed " << config_seed
     << " --seed " << run_seed;
  if (!cmd.common.check.empty()) os << " --check " << cmd.common.check;
  return os.str();
}

int cmd_batch(const BatchCmd& cmd) {
  validate_common(cmd.common);
  if (cmd.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (cmd.init != "clean" && cmd.init != "arbitrary")
    throw std::invalid_argument("batch init must be clean or arbitrary");
  const auto check = parse_check(cmd.common.check);

  int workers = cmd.workers;
  if (workers <= 0) {
    if (const char* env = std::getenv("SDLSIM_WORKERS")) workers = std::atoi(env);
    if (workers <= 0) workers = 1;
  }

  struct Result {
    bool pass = true;
    bool liveness = false;
    ObservedBounds observed;
    uint64_t steps = 0;
    OverheadReport oh;
    std::string reason;
  };
  std::vector<Result> results(cmd.runs);

  auto run_one = [&](uint64_t i) {
    const uint64_t config_seed = derive_seed(cmd.common.seed, 2 * i);
    const uint64_t run_seed = derive_seed(cmd.common.seed, 2 * i + 1);
    const GlobalConfiguration cfg = build_configuration(cmd.common, cmd.init, config_seed);
    auto adversary = make_adversary(StrategySpec{cmd.common.adversary, cmd.common.p_drop});
    RunOptions opts;
    opts.step_limit = cmd.common.step_limit;
    opts.fairness_budget = cmd.common.budget;
    const RunOutcome outcome = run(cfg, *adversary, run_seed, opts);
    const RunVerdict verdict = evaluate_run(outcome, check.value_or(BoundSpec{}));
    Result r;
    r.liveness = outcome.liveness_failure;
    r.observed = verdict.classification.observed;
    r.steps = outcome.steps_used;
    r.oh = overhead(outcome);
    r.pass = !outcome.liveness_failure && (!check || verdict.bounds.pass);
    if (!r.pass) r.reason = failure_reason(verdict);
    results[i] = std::move(r);
  };

  if (workers == 1) {
    for (uint64_t i = 0; i < cmd.runs; ++i) run_one(i);
  } else {
    std::atomic<uint64_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (uint64_t i = next.fetch_add(1); i < cmd.runs; i = next.fetch_add(1)) run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  uint64_t passed = 0, liveness_failures = 0, measured = 0, max_steps = 0;
  ObservedBounds max_obs;
  double sum_msg = 0, sum_ack = 0;
  json failures = json::array();
  for (uint64_t i = 0; i < cmd.runs; ++i) {
    const Result& r = results[i];
    if (r.pass) ++passed;
    if (r.liveness) ++liveness_failures;
    max_obs.alpha = std::max(max_obs.alpha, r.observed.alpha);
    max_obs.beta = std::max(max_obs.beta, r.observed.beta);
    max_obs.gamma = std::max(max_obs.gamma, r.observed.gamma);
    max_obs.delta = std::max(max_obs.delta, r.observed.delta);
    max_steps = std::max(max_steps, r.steps);
    if (r.oh.defined) {
      ++measured;
      sum_msg += r.oh.msg_emits_per_delivery;
      sum_ack += r.oh.ack_emits_per_delivery;
    }
    if (!r.pass) {
      const uint64_t config_seed = derive_seed(cmd.common.seed, 2 * i);
      const uint64_t run_seed = derive_seed(cmd.common.seed, 2 * i + 1);
      json f;
      f["run"] = i;
      f["config_seed"] = config_seed;
      f["run_seed"] = run_seed;
      f["reason"] = r.reason;
      f["replay"] = replay_command(cmd, config_seed, run_seed);
      failures.push_back(std::move(f));
    }
  }

  json summary;
  summary["schema"] = "sdlsim/summary/v1";
  summary["protocol"] = cmd.common.protocol;
  summary["c"] = cmd.common.c;
  summary["init"] = cmd.init;
  summary["adversary"] = cmd.common.adversary;
  if (cmd.common.adversary == "random") summary["p_drop"] = cmd.common.p_drop;
  summary["script_length"] = cmd.common.script_length;
  summary["alphabet"] = effective_alphabet(cmd.common);
  summary["runs"] = cmd.runs;
  summary["master_seed"] = cmd.common.seed;
  summary["seed_scheme"] = "config_seed=derive(master,2i); run_seed=derive(master,2i+1)";
  summary["budget"] = cmd.common.budget > 0 ? cmd.common.budget : 4 * cmd.common.c;
  summary["step_limit"] = cmd.common.step_limit;
  if (check)
    summary["check"] = {check->alpha, check->beta, check->gamma, check->delta};
  summary["passed"] = passed;
  summary["failed"] = cmd.runs - passed;
  summary["pass_rate"] = static_cast<double>(passed) / static_cast<double>(cmd.runs);
  summary["liveness_failures"] = liveness_failures;
  summary["max_observed"] = {{"alpha", max_obs.alpha},
                             {"beta", max_obs.beta},
                             {"gamma", max_obs.gamma},
                             {"delta", max_obs.delta}};
  summary["max_steps_used"] = max_steps;
  if (measured > 0)
    summary["overhead"] = {{"runs_with_deliveries", measured},
                           {"mean_msg_emits_per_delivery", sum_msg / measured},
                           {"mean_ack_emits_per_delivery", sum_ack / measured}};
  summary["failures"] = std::move(failures);

  const std::string text = summary.dump(2);
  if (!cmd.out_path.empty()) {
    std::ofstream f(cmd.out_path);
    if (!f) throw std::invalid_argument("cannot write " + cmd.out_path);
    f << text << '\n';
    std::cout << "summary written to " << cmd.out_path << " (" << passed << "/" << cmd.runs
              << " passed)\n";
  } else {
    std::cout << text << '\n';
  }
  for (const auto& f : summary["failures"])
    std::cerr << "failure replay: " << f["replay"].get<std::string>() << "\n";
  return passed == cmd.runs ? kExitPass : kExitPropertyFailure;
}

struct ExploreCmd {
  std::string protocol = "sdl";
  int c = 1;
  int alphabet = 1;
  int script_length = 1;
  bool clean_only = false;
  uint64_t depth_limit = 0;
  uint64_t max_states = 0;
  std::string json_path;
};

int cmd_explore(const ExploreCmd& cmd) {
  if (cmd.c != 1)
    throw std::invalid_argument(
        "exhaustive exploration is tractable only for --c 1 (use batch campaigns for larger c)");
  ExploreParams p;
  p.protocol = parse_protocol(cmd.protocol);
  p.c = cmd.c;
  p.alphabet_size = cmd.alphabet;
  p.script_len = cmd.script_length;
  p.clean_only = cmd.clean_only;
  p.depth_limit = cmd.depth_limit;
  p.max_states = cmd.max_states;

  const ExploreReport r = explore_exhaustive(p);

  std::cout << "explore protocol=" << cmd.protocol << " c=" << cmd.c
            << " alphabet=" << cmd.alphabet << " script=" << cmd.script_length
            << (cmd.clean_only ? " clean-only" : "") << "\n";
  std::cout << "seeds=" << r.seeds << " states=" << r.states << " edges=" << r.edges
            << " terminals=" << r.terminals << "\n";
  std::cout << "complete=" << (r.complete ? "yes" : "no")
            << " depth_exhausted=" << r.depth_exhausted << "\n";
  std::cout << "reachable outcome vectors (alpha,beta,gamma,delta):\n";
  for (const auto& v : r.vectors)
    std::cout << "  (" << v[0] << "," << v[1] << "," << v[2] << "," << v[3] << ")\n";
  std::cout << "violations beyond the first delivery: " << r.violation_count << "\n";
  for (const ExploreViolation& v : r.violations)
    std::cout << "  " << v.metric << " at position " << v.position << " " << v.detail << "\n";

  if (!cmd.json_path.empty()) {
    json j;
    j["schema"] = "sdlsim/explore/v1";
    j["protocol"] = cmd.protocol;
    j["c"] = cmd.c;
    j["alphabet"] = cmd.alphabet;
    j["script_length"] = cmd.script_length;
    j["clean_only"] = cmd.clean_only;
    j["seeds"] = r.seeds;
    j["states"] = r.states;
    j["edges"] = r.edges;
    j["terminals"] = r.terminals;
    j["complete"] = r.complete;
    j["depth_exhausted"] = r.depth_exhausted;
    j["vectors"] = json::array();
    for (const auto& v : r.vectors) j["vectors"].push_back({v[0], v[1], v[2], v[3]});
    j["violation_count"] = r.violation_count;
    std::ofstream f(cmd.json_path);
    if (!f) throw std::invalid_argument("cannot write " + cmd.json_path);
    f << j.dump(2) << '\n';
  }

  if (r.violation_count > 0) return kExitPropertyFailure;
  if (!r.complete) return kExitPropertyFailure;
  return kExitPass;
}

struct WitnessCmd {
  std::string kind = "phantom";
  int c = 1;
  std::string out_path;
};

int cmd_witness(const WitnessCmd& cmd) {
  if (cmd.c < 1) throw std::invalid_argument("capacity must be >= 1");
  Scenario s;
  if (cmd.kind == "phantom")
    s = witness_phantom(cmd.c);
  else if (cmd.kind == "duplicate")
    s = witness_duplicate(cmd.c);
  else if (cmd.kind == "reorder")
    s = witness_reorder(cmd.c);
  else if (cmd.kind == "abp-loss")
    s = witness_abp_loss(cmd.c);
  else
    throw std::invalid_argument("witness kind must be phantom, duplicate, reorder, or abp-loss");

  if (cmd.out_path.empty()) {
    std::cout << scenario_to_json(s) << "\n";
  } else {
    save_scenario(s, cmd.out_path);
    std::cout << "witness '" << cmd.kind << "' (c=" << cmd.c << ") written to " << cmd.out_path
              << ": " << s.note << "\n";
  }
  return kExitPass;
}

void add_common(CLI::App* sub, CommonOpts& o, bool with_script = true) {
  sub->add_option("--protocol", o.protocol, "Protocol: sdl or abp")
      ->check(CLI::IsMember({"sdl", "abp"}));
  sub->add_option("--c", o.c, "Channel capacity (>= 1)");
  if (with_script) {
    sub->add_option("--script-length", o.script_length, "Number of payloads the app sends");
    sub->add_option("--alphabet", o.alphabet,
                    "Payload alphabet size (default: script length + 1)");
  }
  sub->add_option("--seed", o.seed, "Adversary seed");
  sub->add_option("--adversary", o.adversary,
                  "Strategy: random, lifo, hold-and-flood, eager, replay")
      ->check(CLI::IsMember({"random", "lifo", "hold-and-flood", "eager", "replay"}));
  sub->add_option("--p-drop", o.p_drop, "Drop probability for the random strategy");
  sub->add_option("--budget", o.budget, "Fairness budget B (default 4c)");
  sub->add_option("--step-limit", o.step_limit, "Logical step limit per run");
  sub->add_option("--check", o.check, "Bound spec to enforce, e.g. 0,1,1,1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdlsim: self-stabilizing data-link protocol simulator and checker"};
  app.require_subcommand(1);

  RunCmd run_cmd;
  CLI::App* run_app = app.add_subcommand("run", "Run one simulation");
  add_common(run_app, run_cmd.common);
  run_app->add_option("--init", run_cmd.init,
                      "Initial state: clean | arbitrary | scenario <path>")
      ->expected(1, 2);
  run_app->add_option("--config-seed", run_cmd.config_seed,
                      "Seed for the arbitrary initial configuration (default: --seed)");
  run_app->add_option("--trace", run_cmd.trace_path, "Write the JSON-lines trace here");
  run_app->add_option("--emit-scenario", run_cmd.emit_scenario_path,
                      "Record the run as a replayable scenario file");

  BatchCmd batch_cmd;
  CLI::App* batch_app = app.add_subcommand("batch", "Run a seeded campaign");
  add_common(batch_app, batch_cmd.common);
  batch_cmd.common.script_length = 20;
  batch_app->add_option("--runs", batch_cmd.runs, "Number of runs");
  batch_app->add_option("--init", batch_cmd.init, "clean or arbitrary")
      ->check(CLI::IsMember({"clean", "arbitrary"}));
  batch_app->add_option("--workers", batch_cmd.workers,
                        "Worker threads (default: $SDLSIM_WORKERS or 1)");
  batch_app->add_option("--out", batch_cmd.out_path, "Write the JSON summary here");

  ExploreCmd explore_cmd;
  CLI::App* explore_app =
      app.add_subcommand("explore", "Exhaustively explore tiny instances (c=1)");
  explore_app->add_option("--protocol", explore_cmd.protocol, "Protocol: sdl or abp")
      ->check(CLI::IsMember({"sdl", "abp"}));
  explore_app->add_option("--c", explore_cmd.c, "Channel capacity (must be 1)");
  explore_app->add_option("--alphabet", explore_cmd.alphabet, "Alphabet size (1 or 2)");
  explore_app->add_option("--script-length", explore_cmd.script_length, "Script length (0..2)");
  explore_app->add_flag("--clean-only", explore_cmd.clean_only,
                        "Explore clean starting configurations only");
  explore_app->add_option("--depth-limit", explore_cmd.depth_limit, "BFS depth cap (0: none)");
  explore_app->add_option("--max-states", explore_cmd.max_states, "State cap (0: default)");
  explore_app->add_option("--json", explore_cmd.json_path, "Write the report as JSON here");

  WitnessCmd witness_cmd;
  CLI::App* witness_app =
      app.add_subcommand("witness", "Emit a lower-bound witness scenario");
  witness_app->add_option("--kind", witness_cmd.kind,
                          "phantom | duplicate | reorder | abp-loss")
      ->check(CLI::IsMember({"phantom", "duplicate", "reorder", "abp-loss"}));
  witness_app->add_option("--c", witness_cmd.c, "Channel capacity");
  witness_app->add_option("--out", witness_cmd.out_path, "Output scenario path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run_app->parsed()) return cmd_run(run_cmd);
    if (batch_app->parsed()) return cmd_batch(batch_cmd);
    if (explore_app->parsed()) return cmd_explore(explore_cmd);
    if (witness_app->parsed()) return cmd_witness(witness_cmd);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
