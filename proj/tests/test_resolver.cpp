#include <doctest.h>

#include <cctype>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "pact/resolver.hpp"

using namespace pact;

namespace {

void add_value(ProvenanceState& state, const std::string& id, const Json& payload,
               TrustLevel trust) {
  TaggedValue v;
  v.value_id = id;
  v.payload = payload;
  v.tag.origins = {id};
  v.tag.trust = trust;
  v.producer_origin = id;
  v.producer_trust = trust;
  state.insert_value(v);
}

ProvenanceState session_state() {
  ProvenanceState state;
  add_value(state, "user:u1", "alice@example.com", TrustLevel::User);
  add_value(state, "user:u2", "Send the Q3 file", TrustLevel::User);
  add_value(state, "const:greeting", "Hello team", TrustLevel::Trusted);
  add_value(state, "tool:web_fetch#1.text", "Roadmap: ship v2 and hire", TrustLevel::External);
  add_value(state, "ext:inbox#1", "urgent wire 5k", TrustLevel::External);
  return state;
}

struct OracleMatch {
  std::vector<std::string> sources;
  double score = 0.0;
};

// Independent re-derivation of the transform score: scan every window by hand
// instead of using find, so the two implementations can cross-check.
std::optional<OracleMatch> oracle_transform(const std::string& raw,
                                            const std::map<std::string, std::string>& norms,
                                            double threshold) {
  std::string needle = normalize_text(raw);
  if (needle.empty()) return std::nullopt;

  OracleMatch contained;
  for (const auto& [id, hay] : norms) {
    if (needle.size() > hay.size()) continue;
    for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s) {
      if (hay.compare(s, needle.size(), needle) == 0) {
        contained.sources.push_back(id);
        break;
      }
    }
  }
  if (!contained.sources.empty()) {
    contained.score = 1.0;
    return contained;
  }

  std::vector<char> covered(needle.size(), 0);
  OracleMatch assembled;
  for (const auto& [id, part] : norms) {
    if (part.size() < 4 || part.size() > needle.size()) continue;
    bool hit = false;
    for (std::size_t s = 0; s + part.size() <= needle.size(); ++s) {
      if (needle.compare(s, part.size(), part) == 0) {
        for (std::size_t k = 0; k < part.size(); ++k) covered[s + k] = 1;
        hit = true;
      }
    }
    if (hit) assembled.sources.push_back(id);
  }
  if (assembled.sources.empty()) return std::nullopt;
  std::size_t on = 0;
  for (char c : covered) on += static_cast<std::size_t>(c);
  assembled.score = static_cast<double>(on) / static_cast<double>(needle.size());
  if (assembled.score < threshold) return std::nullopt;
  return assembled;
}

}  // namespace

TEST_CASE("text normalization folds case and whitespace runs") {
  CHECK(normalize_text("  Hello   WORLD ") == "hello world");
  CHECK(normalize_text("a\t b\nc") == "a b c");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text(" \t\n ") == "");
  CHECK(normalize_text("NoSpaces") == "nospaces");
}

TEST_CASE("exact user and constant payloads resolve with their recorded tags") {
  ProvenanceState state = session_state();

  ResolutionResult r = resolve("alice@example.com", state, ArgRole::Target);
  CHECK(r.method == ResolveMethod::ExactUser);
  CHECK(r.confidence == 1.0);
  CHECK(r.source_ids == std::vector<std::string>{"user:u1"});
  CHECK(r.tag.trust == TrustLevel::User);
  CHECK(r.tag.origins == std::set<std::string>{"user:u1"});

  ResolutionResult c = resolve("Hello team", state, ArgRole::Content);
  CHECK(c.method == ResolveMethod::ExactUser);
  CHECK(c.tag.trust == TrustLevel::Trusted);
}

TEST_CASE("a payload recorded by several sources merges every hit") {
  ProvenanceState state = session_state();
  add_value(state, "user:u3", "shared", TrustLevel::User);
  add_value(state, "const:dup", "shared", TrustLevel::Trusted);

  ResolutionResult r = resolve("shared", state, ArgRole::Target);
  CHECK(r.method == ResolveMethod::ExactUser);
  CHECK(r.source_ids == std::vector<std::string>{"const:dup", "user:u3"});
  CHECK(r.tag.trust == TrustLevel::User);  // the meet over both recordings
  CHECK(r.tag.origins == std::set<std::string>{"const:dup", "user:u3"});
}

TEST_CASE("recorded tool output resolves by payload or by identifier") {
  ProvenanceState state = session_state();

  ResolutionResult by_payload = resolve("Roadmap: ship v2 and hire", state, ArgRole::Content);
  CHECK(by_payload.method == ResolveMethod::ExactTool);
  CHECK(by_payload.source_ids == std::vector<std::string>{"tool:web_fetch#1.text"});
  CHECK(by_payload.tag.trust == TrustLevel::External);

  // A string naming a recorded value id is an object handle to that value.
  ResolutionResult by_id = resolve("tool:web_fetch#1.text", state, ArgRole::Selector);
  CHECK(by_id.method == ResolveMethod::ExactTool);
  CHECK(by_id.source_ids == std::vector<std::string>{"tool:web_fetch#1.text"});

  // User and constant recordings win before tool recordings.
  add_value(state, "tool:echo#1.result", "alice@example.com", TrustLevel::ToolOutput);
  CHECK(resolve("alice@example.com", state, ArgRole::Target).method ==
        ResolveMethod::ExactUser);
}

TEST_CASE("substrings of recorded text resolve as transformations") {
  ProvenanceState state = session_state();

  ResolutionResult r = resolve("SHIP V2", state, ArgRole::Command);
  CHECK(r.method == ResolveMethod::Transform);
  CHECK(r.confidence == 1.0);
  CHECK(r.source_ids == std::vector<std::string>{"tool:web_fetch#1.text"});
  CHECK(r.tag.trust == TrustLevel::External);

  ResolutionResult spaced = resolve("  ship   v2 ", state, ArgRole::Command);
  CHECK(spaced.method == ResolveMethod::Transform);
  CHECK(spaced.source_ids == std::vector<std::string>{"tool:web_fetch#1.text"});
}

TEST_CASE("values assembled from recorded strings score by interval coverage") {
  ProvenanceState state = session_state();

  // 17 + 1 + 14 normalized characters; the joining space is the only gap.
  ResolutionResult r =
      resolve("alice@example.com urgent wire 5k", state, ArgRole::Target);
  CHECK(r.method == ResolveMethod::Transform);
  CHECK(r.confidence == doctest::Approx(31.0 / 32.0));
  CHECK(r.source_ids == std::vector<std::string>{"ext:inbox#1", "user:u1"});
  CHECK(r.tag.trust == TrustLevel::External);  // meet of USER and EXTERNAL
  CHECK(r.tag.origins == std::set<std::string>{"ext:inbox#1", "user:u1"});

  // Mostly novel text fails the coverage threshold and falls through.
  ResolutionResult low = resolve("alice@example.com wrote a very long novel chapter today",
                                 state, ArgRole::Target);
  CHECK(low.method == ResolveMethod::ConservativeFallback);
}

TEST_CASE("coverage counts overlapping occurrences and the threshold is sharp") {
  ProvenanceState state;
  add_value(state, "tool:t#1.result", "abab", TrustLevel::ToolOutput);
  auto overlapping = transform_match("ababab", state);
  REQUIRE(overlapping.has_value());
  CHECK(overlapping->score == 1.0);
  CHECK(overlapping->source_ids == std::vector<std::string>{"tool:t#1.result"});

  ProvenanceState edge;
  add_value(edge, "tool:t#1.result", "abcdefghijklmnopqr", TrustLevel::ToolOutput);
  auto at_threshold = transform_match("abcdefghijklmnopqr z", edge);  // 18 of 20 covered
  REQUIRE(at_threshold.has_value());
  CHECK(at_threshold->score == doctest::Approx(0.9));
  CHECK(!transform_match("abcdefghijklmnopqr zz", edge).has_value());  // 18 of 21

  // Sub-4-character recordings are never coverage evidence.
  ProvenanceState tiny;
  add_value(tiny, "user:u1", "q3", TrustLevel::User);
  CHECK(!transform_match("q3 q3 q3", tiny).has_value());
}

TEST_CASE("transform matching agrees with a window-scan oracle on random inputs") {
  ProvenanceState state = session_state();
  add_value(state, "user:u4", "ab", TrustLevel::User);  // short recording, containment only
  std::map<std::string, std::string> norms;
  std::vector<std::string> raw_payloads;
  for (const auto& [id, v] : state.values) {
    norms[id] = normalize_text(v.payload.get<std::string>());
    raw_payloads.push_back(v.payload.get<std::string>());
  }

  std::mt19937_64 rng(91);
  const std::vector<std::string> junk = {"zzqx", "padding words here", "42", "-", "synthetic"};
  const std::vector<std::string> seps = {" ", "", "  ", " x "};
  for (int i = 0; i < 2000; ++i) {
    std::string needle;
    int chunks = 1 + static_cast<int>(rng() % 3);
    for (int c = 0; c < chunks; ++c) {
      if (c > 0) needle += seps[rng() % seps.size()];
      if (rng() % 4 == 0) {
        needle += junk[rng() % junk.size()];
      } else {
        const std::string& src = raw_payloads[rng() % raw_payloads.size()];
        std::size_t start = rng() % src.size();
        std::size_t len = 1 + rng() % (src.size() - start);
        std::string piece = src.substr(start, len);
        if (rng() % 3 == 0) {
          for (auto& ch : piece) ch = static_cast<char>(std::toupper(ch));
        }
        needle += piece;
      }
    }

    auto got = transform_match(needle, state);
    auto want = oracle_transform(needle, norms, 0.9);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->score == doctest::Approx(want->score));
      CHECK(got->source_ids == want->sources);
    }
  }
}

TEST_CASE("unplaceable authority arguments fail low with a stable opaque origin") {
  ProvenanceState state = session_state();

  for (auto role : {std::optional<ArgRole>{ArgRole::Target}, std::optional<ArgRole>{ArgRole::Command},
                    std::optional<ArgRole>{ArgRole::Credential}, std::optional<ArgRole>{}}) {
    ResolutionResult r = resolve("never seen before", state, role);
    CHECK(r.method == ResolveMethod::ConservativeFallback);
    CHECK(r.tag.trust == TrustLevel::External);
    CHECK(r.confidence == 0.0);
    CHECK(r.source_ids.empty());
    REQUIRE(r.tag.origins.size() == 1);
    const std::string& origin = *r.tag.origins.begin();
    CHECK(origin.rfind("unresolved:", 0) == 0);
    CHECK(origin.size() == 11 + 16);
  }

  ResolutionResult a = resolve("payload one", state, ArgRole::Target);
  ResolutionResult b = resolve("payload one", state, ArgRole::Command);
  ResolutionResult c = resolve("payload two", state, ArgRole::Target);
  CHECK(a.tag.origins == b.tag.origins);
  CHECK(a.tag.origins != c.tag.origins);
}

TEST_CASE("the classifier slot only fires for non-authority roles above its threshold") {
  ProvenanceState state = session_state();
  const Json payload = "free-form annotation";

  SUBCASE("without a plug, non-authority roles still fall back") {
    CHECK(resolve(payload, state, ArgRole::Content).method ==
          ResolveMethod::ConservativeFallback);
  }

  SUBCASE("the abstaining plug changes nothing") {
    ClassifierPlug plug = abstaining_plug();
    CHECK(resolve(payload, state, ArgRole::Content, &plug).method ==
          ResolveMethod::ConservativeFallback);
  }

  SUBCASE("a confident answer naming recorded values is adopted") {
    ClassifierPlug plug;
    plug.classify = [](const Json&, const std::vector<std::string>& candidates,
                       std::optional<ArgRole>) {
      CHECK(!candidates.empty());
      return std::pair<std::vector<std::string>, double>{
          {"user:u2", "const:greeting"}, 0.9};
    };
    ResolutionResult r = resolve(payload, state, ArgRole::Content, &plug);
    CHECK(r.method == ResolveMethod::Classifier);
    CHECK(r.confidence == 0.9);
    CHECK(r.source_ids == std::vector<std::string>{"const:greeting", "user:u2"});
    CHECK(r.tag.trust == TrustLevel::User);

    // Authority roles never consult the plug.
    CHECK(resolve(payload, state, ArgRole::Target, &plug).method ==
          ResolveMethod::ConservativeFallback);
  }

  SUBCASE("low confidence or unknown ids fall back") {
    ClassifierPlug timid;
    timid.classify = [](const Json&, const std::vector<std::string>&, std::optional<ArgRole>) {
      return std::pair<std::vector<std::string>, double>{{"user:u2"}, 0.5};
    };
    CHECK(resolve(payload, state, ArgRole::Content, &timid).method ==
          ResolveMethod::ConservativeFallback);

    ClassifierPlug liar;
    liar.classify = [](const Json&, const std::vector<std::string>&, std::optional<ArgRole>) {
      return std::pair<std::vector<std::string>, double>{{"user:ghost"}, 0.99};
    };
    CHECK(resolve(payload, state, ArgRole::Content, &liar).method ==
          ResolveMethod::ConservativeFallback);
  }
}

TEST_CASE("method names are stable strings") {
  CHECK(resolve_method_name(ResolveMethod::ExactUser) == "exact_user");
  CHECK(resolve_method_name(ResolveMethod::ExactTool) == "exact_tool");
  CHECK(resolve_method_name(ResolveMethod::Transform) == "transform");
  CHECK(resolve_method_name(ResolveMethod::Classifier) == "classifier");
  CHECK(resolve_method_name(ResolveMethod::ConservativeFallback) == "conservative_fallback");
}

TEST_CASE("the labeled-line evaluation counts exactness and conservativeness") {
  ProvenanceState state = session_state();
  std::ostringstream lines;
  auto emit = [&](const Json& value, const ProvenanceTag& gold, const char* role) {
    Json row;
    row["value"] = value;
    row["gold_tag"] = tag_to_json(gold);
    if (role != nullptr) row["role"] = role;
    lines << row.dump() << "\n";
  };

  ProvenanceTag user_tag;
  user_tag.origins = {"user:u1"};
  user_tag.trust = TrustLevel::User;
  emit("alice@example.com", user_tag, "TARGET");  // exact and trust-equal

  ProvenanceTag fetch_tag;
  fetch_tag.origins = {"tool:web_fetch#1.text"};
  fetch_tag.trust = TrustLevel::External;
  emit("ship v2", fetch_tag, "COMMAND");  // transform reconstructs the full tag

  ProvenanceTag gold_user;
  gold_user.origins = {"user:u9"};
  gold_user.trust = TrustLevel::User;
  emit("unknown setting", gold_user, "TARGET");  // fallback sits below the gold trust

  lines << "\n   \n";  // blank lines are skipped

  ProvenanceTag gold_external;
  gold_external.origins = {"ext:inbox#1"};
  gold_external.trust = TrustLevel::External;
  emit("urgent wire 5k", gold_external, nullptr);  // exact tool hit, role-free row

  ResolverEval eval = evaluate_resolver(lines.str(), state);
  CHECK(eval.total == 4);
  CHECK(eval.exact == 3);
  CHECK(eval.conservative == 4);
}
