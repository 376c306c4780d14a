#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pact/corpus.hpp"
#include "pact/monitor.hpp"
#include "pact/synthesis.hpp"

using namespace pact;
namespace fs = std::filesystem;

namespace {

// Scratch directory shared by the whole binary run; unique per process.
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("pact-cli-" + std::to_string(static_cast<long>(::getpid())));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const fs::path& capture = {}) {
  std::string cmd = std::string(PACT_CLI_PATH) + " " + args;
  if (capture.empty()) {
    cmd += " > /dev/null 2>&1";
  } else {
    cmd += " > " + capture.string() + " 2>&1";
  }
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TaggedValue cli_value(const std::string& id, TrustLevel trust) {
  TaggedValue v;
  v.value_id = id;
  v.payload = "x";
  v.tag.origins = {id};
  v.tag.trust = trust;
  v.producer_origin = id;
  v.producer_trust = trust;
  return v;
}

fs::path email_contract_file() {
  static const fs::path path = [] {
    fs::path p = scratch() / "send_email.contract.json";
    Contract c = synth_contract(corpus_schema("send_email"), Level::L2);
    write_file(p, contract_to_json(c).dump());
    return p;
  }();
  return path;
}

fs::path email_call_file(TrustLevel recipient_trust, const std::string& name) {
  ToolCall call;
  call.tool_name = "send_email";
  call.call_index = 1;
  call.args = {cli_value("user:u1", recipient_trust), cli_value("tool:x#1", TrustLevel::ToolOutput)};
  fs::path p = scratch() / name;
  write_file(p, call_to_json(call).dump());
  return p;
}

}  // namespace

TEST_CASE("checking a single call maps the decision onto the exit code") {
  fs::path ok_call = email_call_file(TrustLevel::User, "call_ok.json");
  fs::path bad_call = email_call_file(TrustLevel::External, "call_bad.json");
  fs::path out = scratch() / "check_out.json";

  CHECK(run_cli("check " + ok_call.string() + " " + email_contract_file().string(), out) == 0);
  Json allow = Json::parse(slurp(out));
  CHECK(allow.at("decision") == "ALLOW");
  CHECK(allow.at("violations").empty());

  CHECK(run_cli("check " + bad_call.string() + " " + email_contract_file().string(), out) == 3);
  Json block = Json::parse(slurp(out));
  CHECK(block.at("decision") == "BLOCK");
  CHECK(block.at("violations").size() == 1);
  CHECK(block.at("violations")[0].at("kind") == "trust_floor");
}

TEST_CASE("unreadable or malformed inputs exit with the usage code") {
  fs::path garbage = scratch() / "garbage.json";
  write_file(garbage, "{not json");
  CHECK(run_cli("check " + garbage.string() + " " + email_contract_file().string()) == 2);
  CHECK(run_cli("check /nonexistent.json " + email_contract_file().string()) == 2);
  CHECK(run_cli("definitely-not-a-command") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run --monitor no-such-monitor") == 2);
  CHECK(run_cli("run --policies sideways") == 2);
  CHECK(run_cli("run --invert upside_down") == 2);
  CHECK(run_cli("bench -n 10") == 2);  // sample too small to quantile
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("drafting from a schema emits one contract or the whole ladder") {
  fs::path schema = scratch() / "send_email.schema.json";
  write_file(schema, schema_to_json(corpus_schema("send_email")).dump());
  fs::path out = scratch() / "synth_out.json";

  CHECK(run_cli("synth " + schema.string() + " --level L1", out) == 0);
  Json one = Json::parse(slurp(out));
  CHECK(one.at("level") == "L1");
  CHECK(one.at("tool") == "send_email");

  CHECK(run_cli("synth " + schema.string() + " --chain -o " + out.string()) == 0);
  Json chain = Json::parse(slurp(out));
  REQUIRE(chain.is_array());
  REQUIRE(chain.size() == 4);
  CHECK(chain[0].at("level") == "L0");
  CHECK(chain[3].at("level") == "L3");

  fs::path bad_schema = scratch() / "bad.schema.json";
  write_file(bad_schema, "[]");
  CHECK(run_cli("synth " + bad_schema.string()) == 2);
}

TEST_CASE("suite runs write reports that the report command can render back") {
  fs::path out = scratch() / "l2_report.json";
  fs::path table = scratch() / "table.txt";

  CHECK(run_cli("run --monitor pact-l2 --jobs 2 -o " + out.string()) == 0);
  Json report = Json::parse(slurp(out));
  CHECK(report.at("monitor") == "pact-l2");
  CHECK(report.at("utility") == 1.0);
  CHECK(report.at("security") == 1.0);
  CHECK(report.at("fp") == 0);
  CHECK(report.at("fn") == 0);
  CHECK(report.at("benign_total") == 11);
  CHECK(report.at("attack_total") == 8);
  CHECK(report.at("scenarios").size() == 19);

  CHECK(run_cli("report " + out.string(), table) == 0);
  std::string rendered = slurp(table);
  CHECK(rendered.find("pact-l2") != std::string::npos);
  CHECK(rendered.find("100.0") != std::string::npos);
}

TEST_CASE("an exported suite replays identically from disk") {
  fs::path dir = scratch() / "exported";
  fs::path out = scratch() / "replayed.json";

  CHECK(run_cli("run --export " + dir.string()) == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") ++files;
  }
  CHECK(files == 19);

  CHECK(run_cli("run --suite " + dir.string() + " --monitor pact-l2 -o " + out.string()) == 0);
  Json report = Json::parse(slurp(out));
  CHECK(report.at("utility") == 1.0);
  CHECK(report.at("security") == 1.0);
}

TEST_CASE("the level sweep and inversion flags drive the experiment paths") {
  fs::path out = scratch() / "sweep.json";
  CHECK(run_cli("run --sweep-levels --jobs 2 -o " + out.string()) == 0);
  Json sweep = Json::parse(slurp(out));
  CHECK(sweep.at("nested") == true);
  CHECK(sweep.at("strictly_finer") == true);
  REQUIRE(sweep.at("levels").size() == 4);
  CHECK(sweep.at("levels")[3].at("utility") == 1.0);

  fs::path inv = scratch() / "invert.json";
  CHECK(run_cli("run --monitor pact-l2 --invert target_to_content --jobs 2 -o " + inv.string()) ==
        0);
  Json inverted = Json::parse(slurp(inv));
  CHECK(inverted.at("security") < 1.0);
  CHECK(inverted.at("utility") == 1.0);
}

TEST_CASE("noise runs honor the explicit seed over the environment") {
  fs::path a = scratch() / "noise_a.json";
  fs::path b = scratch() / "noise_b.json";
  std::string base = "run --noise-rate 0 --noise-rate 0.3 --seeds 2 --jobs 2 --seed 5 -o ";
  CHECK(run_cli(base + a.string()) == 0);
  CHECK(run_cli(base + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));  // same seed, bitwise identical report

  Json points = Json::parse(slurp(a));
  REQUIRE(points.is_array());
  REQUIRE(points.size() == 2);
  CHECK(points[0].at("rate") == 0.0);
  CHECK(points[0].at("security_off") == 1.0);
  CHECK(points[1].at("security_on") >= points[1].at("security_off").get<double>());
}
