#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pact/contract.hpp"
#include "pact/scenario.hpp"
#include "pact/synthesis.hpp"

namespace pact {

// Schemas for the thirteen built-in tools across six task domains (email,
// messaging, files, code, api, calendar). deploy_config and format_report
// additionally ship hand-written contracts; their schemas exist so the flat
// baselines can label them.
std::vector<ToolSchema> corpus_schemas();
const ToolSchema& corpus_schema(const std::string& tool);  // throws ScenarioError

// Hand-written contracts: deploy_config accepts internally generated
// configuration commands (TOOL_OUTPUT floor, web/raw-external origins
// forbidden); format_report passes its inputs' trust through to the output.
Contract deploy_config_contract();
Contract format_report_contract();

// The fixed mixed-trust suite: eleven benign and eight attack scenarios,
// each domain holding at least one of each. Sorted by id.
std::vector<Scenario> corpus_scenarios();
Scenario scenario_by_id(const std::string& id);  // throws ScenarioError

// 75 generated longer-horizon scenarios (25 each at 5, 10 and 20 tool
// calls). Odd indices hide one injected value misused at a uniformly random
// later call; placement of both injection and misuse varies per seed.
std::vector<Scenario> replanning_stress_suite(std::uint64_t seed);

}  // namespace pact
