#pragma once

#include <string>
#include <vector>

#include "sdl/adversary.hpp"
#include "sdl/harness.hpp"

namespace sdl {

inline constexpr const char* kScenarioSchema = "sdlsim/scenario/v1";

// A reproducible run: a starting configuration plus the recorded decision
// stream that drives it.
struct Scenario {
  GlobalConfiguration config;
  std::vector<ReplayRecord> replay;
  std::string note;
};

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace sdl
