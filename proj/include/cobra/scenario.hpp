#pragma once

#include "cobra/sim.hpp"

#include <json.hpp>

#include <string>

namespace cobra {

constexpr int kScenarioSchemaVersion = 1;

// Throws ScenarioError on schema problems; config consistency is checked by resolve().
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const Scenario& s);

// COBRA_SEED, when set, replaces the scenario seed.
void apply_seed_override(Scenario& s);

} // namespace cobra
