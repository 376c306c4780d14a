#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pact/corpus.hpp"
#include "pact/errors.hpp"
#include "pact/harness.hpp"
#include "pact/jsonx.hpp"
#include "pact/monitor.hpp"
#include "pact/synthesis.hpp"

namespace {

constexpr int kExitAllow = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBlock = 3;

pact::Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pact::ParseError("cannot open " + path);
  pact::Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw pact::ParseError(path + ": " + e.what());
  }
  return j;
}

// Write-then-rename so readers never observe a partial file.
void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw pact::ParseError("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void emit(const std::string& out_path, const pact::Json& j) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_atomic(out_path, text);
  }
}

std::uint64_t pick_seed(std::uint64_t flag_seed, bool seed_given) {
  if (seed_given) return flag_seed;
  if (const char* env = std::getenv("PACT_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 7;
}

std::vector<pact::Scenario> load_suite(const std::string& dir) {
  if (dir.empty()) return pact::corpus_scenarios();
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<pact::Scenario> suite;
  for (const auto& f : files) suite.push_back(pact::scenario_from_json(read_json_file(f)));
  if (suite.empty()) throw pact::SuiteError("no scenarios under " + dir);
  return suite;
}

pact::SuiteReport report_from_json(const pact::Json& j) {
  pact::SuiteReport r;
  r.monitor = j.at("monitor").get<std::string>();
  r.benign_total = j.at("benign_total").get<std::size_t>();
  r.attack_total = j.at("attack_total").get<std::size_t>();
  r.fp = j.at("fp").get<std::size_t>();
  r.fn = j.at("fn").get<std::size_t>();
  r.benign_pass = r.benign_total - r.fp;
  r.attacks_blocked = r.attack_total - r.fn;
  r.utility_ci = {j.at("utility_ci")[0].get<double>(), j.at("utility_ci")[1].get<double>()};
  r.security_ci = {j.at("security_ci")[0].get<double>(), j.at("security_ci")[1].get<double>()};
  return r;
}

int cmd_check(const std::string& call_path, const std::string& contract_path,
              const std::string& state_path, bool policies_on) {
  pact::ToolCall call = pact::call_from_json(read_json_file(call_path));
  pact::Contract contract = pact::contract_from_json(read_json_file(contract_path));
  pact::ProvenanceState state;
  if (!state_path.empty()) state = pact::state_from_json(read_json_file(state_path));
  pact::PolicyConfig policies;
  if (policies_on) policies = pact::default_policies();
  pact::ProcedureRegistry procs;
  pact::Verdict verdict = pact::check_call(call, contract, state, {}, procs, policies);
  std::cout << pact::verdict_to_json(verdict).dump(2) << "\n";
  return verdict.decision == pact::Decision::Allow ? kExitAllow : kExitBlock;
}

int cmd_synth(const std::string& schema_path, const std::string& level, bool chain,
              const std::string& out_path) {
  pact::ToolSchema schema = pact::schema_from_json(read_json_file(schema_path));
  pact::Json j;
  if (chain) {
    j = pact::Json::array();
    for (const auto& c : pact::refinement_chain(schema)) {
      j.push_back(pact::contract_to_json(c));
    }
  } else {
    j = pact::contract_to_json(pact::synth_contract(schema, pact::parse_level(level)));
  }
  emit(out_path, j);
  return 0;
}

int cmd_run(const std::string& suite_dir, const std::string& monitor, bool sweep,
            std::vector<double> noise_rates, int noise_seeds, const std::string& invert,
            bool policies_on, std::uint64_t seed, int jobs, const std::string& out_path,
            const std::string& export_dir) {
  if (!export_dir.empty()) {
    std::filesystem::create_directories(export_dir);
    for (const auto& s : pact::corpus_scenarios()) {
      write_atomic(export_dir + "/" + s.id + ".json", pact::scenario_to_json(s).dump(2) + "\n");
    }
    std::cout << "exported builtin suite to " << export_dir << "\n";
    return 0;
  }
  std::vector<pact::Scenario> suite = load_suite(suite_dir);
  const std::vector<pact::ToolSchema> schemas = pact::corpus_schemas();

  if (sweep) {
    pact::PrecisionSweep sweep_result = pact::precision_sweep(suite, policies_on, jobs);
    pact::Json j;
    j["levels"] = pact::Json::array();
    for (const auto& r : sweep_result.reports) j["levels"].push_back(pact::report_to_json(r));
    j["nested"] = sweep_result.nested;
    j["strictly_finer"] = sweep_result.strictly_finer;
    emit(out_path, j);
    std::cout << pact::render_reports(sweep_result.reports);
    return 0;
  }

  if (!noise_rates.empty()) {
    auto points = pact::noise_sensitivity(suite, noise_rates, noise_seeds, seed, jobs);
    pact::Json j = pact::Json::array();
    for (const auto& p : points) {
      j.push_back(pact::Json{{"rate", p.rate},
                             {"security_off", p.security_off},
                             {"security_on", p.security_on},
                             {"utility_off", p.utility_off},
                             {"utility_on", p.utility_on}});
    }
    emit(out_path, j);
    return 0;
  }

  std::vector<std::string> names;
  if (monitor == "all") {
    names = pact::monitor_names();
  } else {
    names.push_back(monitor);
  }
  std::vector<pact::SuiteReport> reports;
  for (const auto& name : names) {
    pact::MonitorConfig config = pact::monitor_by_name(name, schemas);
    config.policies_on = config.policies_on && policies_on;
    if (invert == "target_to_content" || invert == "content_to_target") {
      auto direction = invert == "target_to_content"
                           ? pact::InversionDirection::TargetToContent
                           : pact::InversionDirection::ContentToTarget;
      config.contract_mutator = [direction](const pact::Contract& c) {
        return pact::semantic_inversion(c, direction);
      };
    } else if (!invert.empty()) {
      throw pact::ParseError("unknown inversion: " + invert);
    }
    reports.push_back(pact::run_suite(suite, config, jobs));
  }
  pact::Json j;
  if (reports.size() == 1) {
    j = pact::report_to_json(reports.front());
  } else {
    j = pact::Json::array();
    for (const auto& r : reports) j.push_back(pact::report_to_json(r));
  }
  emit(out_path, j);
  std::cout << pact::render_reports(reports);
  return 0;
}

int cmd_bench(int n) {
  pact::BenchResult r = pact::bench_checks(n);
  pact::Json j{{"p50_us", r.p50_us}, {"p99_us", r.p99_us},
               {"throughput_per_s", r.throughput_per_s}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& files) {
  std::vector<pact::SuiteReport> reports;
  for (const auto& f : files) {
    pact::Json j = read_json_file(f);
    if (j.is_array()) {
      for (const auto& e : j) reports.push_back(report_from_json(e));
    } else if (j.contains("levels")) {
      for (const auto& e : j.at("levels")) reports.push_back(report_from_json(e));
    } else {
      reports.push_back(report_from_json(j));
    }
  }
  std::cout << pact::render_reports(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provenance-aware contract enforcement for tool-using agents"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Decide one tool call against a contract");
  std::string call_path, contract_path, state_path;
  bool check_policies = false;
  check->add_option("call", call_path, "tool call JSON")->required();
  check->add_option("contract", contract_path, "contract JSON")->required();
  check->add_option("state", state_path, "session state JSON");
  check->add_flag("--policies", check_policies, "enable the global policies");

  auto* synth = app.add_subcommand("synth", "Draft a contract from a tool schema");
  std::string schema_path, synth_level = "L2", synth_out;
  bool synth_chain = false;
  synth->add_option("schema", schema_path, "tool schema JSON")->required();
  synth->add_option("--level", synth_level, "contract level (L0..L3)");
  synth->add_flag("--chain", synth_chain, "emit the full L0..L3 chain");
  synth->add_option("-o,--out", synth_out, "output file (atomic)");

  auto* run = app.add_subcommand("run", "Replay a scenario suite under a monitor");
  std::string suite_dir, monitor = "pact-l2", invert, run_out, export_dir;
  std::string policies = "on";
  bool sweep = false;
  std::vector<double> noise_rates;
  int noise_seeds = 20, jobs = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  run->add_option("--suite", suite_dir, "directory of scenario JSON files (default: builtin)");
  run->add_option("--monitor", monitor, "monitor name, or 'all'");
  run->add_flag("--sweep-levels", sweep, "run the L0..L3 refinement sweep");
  run->add_option("--noise-rate", noise_rates, "role-noise rate (repeatable)");
  run->add_option("--seeds", noise_seeds, "seeds per noise rate");
  run->add_option("--invert", invert, "target_to_content or content_to_target");
  run->add_option("--policies", policies, "on or off");
  run->add_option("--seed", seed, "base RNG seed (env PACT_SEED otherwise)")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  run->add_option("--jobs", jobs, "worker threads");
  run->add_option("-o,--out", run_out, "report JSON file (atomic)");
  run->add_option("--export", export_dir, "write the builtin suite as JSON files and exit");

  auto* bench = app.add_subcommand("bench", "Measure check latency and throughput");
  int bench_n = 100000;
  bench->add_option("-n,--iterations", bench_n, "number of checks");

  auto* report = app.add_subcommand("report", "Render stored report JSON as a table");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "report JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*check) return cmd_check(call_path, contract_path, state_path, check_policies);
    if (*synth) return cmd_synth(schema_path, synth_level, synth_chain, synth_out);
    if (*run) {
      if (policies != "on" && policies != "off") {
        throw pact::ParseError("--policies expects on or off");
      }
      return cmd_run(suite_dir, monitor, sweep, noise_rates, noise_seeds, invert,
                     policies == "on", pick_seed(seed, seed_given), jobs, run_out, export_dir);
    }
    if (*bench) return cmd_bench(bench_n);
    if (*report) return cmd_report(report_files);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
