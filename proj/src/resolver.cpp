#include "pact/resolver.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <sstream>

#include "pact/errors.hpp"

namespace pact {

std::string_view resolve_method_name(ResolveMethod m) {
  switch (m) {
    case ResolveMethod::ExactUser: return "exact_user";
    case ResolveMethod::ExactTool: return "exact_tool";
    case ResolveMethod::Transform: return "transform";
    case ResolveMethod::Classifier: return "classifier";
    case ResolveMethod::ConservativeFallback: return "conservative_fallback";
  }
  return "conservative_fallback";
}

ClassifierPlug abstaining_plug() {
  ClassifierPlug plug;
  plug.classify = [](const Json&, const std::vector<std::string>&, std::optional<ArgRole>) {
    return std::pair<std::vector<std::string>, double>{{}, 0.0};
  };
  plug.confidence_threshold = 0.8;
  return plug;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // leading whitespace dropped
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

bool is_source_value(const TaggedValue& v) {
  return v.value_id.rfind("user:", 0) == 0 || v.value_id.rfind("const:", 0) == 0;
}

ProvenanceTag merge_all(const ProvenanceState& state, const std::vector<std::string>& ids) {
  ProvenanceTag tag;
  bool first = true;
  for (const auto& id : ids) {
    const ProvenanceTag& t = state.value(id).tag;
    tag = first ? t : merge(tag, t);
    first = false;
  }
  return tag;
}

ResolutionResult conservative_result(const Json& value) {
  ResolutionResult r;
  r.tag.origins.insert("unresolved:" + hex64(fnv1a64(value.dump())));
  r.tag.trust = TrustLevel::External;
  r.method = ResolveMethod::ConservativeFallback;
  r.confidence = 0.0;
  return r;
}

}  // namespace

std::optional<TransformMatch> transform_match(const Json& value, const ProvenanceState& state,
                                              double threshold) {
  if (!value.is_string()) return std::nullopt;
  std::string needle = normalize_text(value.get<std::string>());
  if (needle.empty()) return std::nullopt;

  // Stage one: the value sits whole inside one or more recorded strings.
  std::vector<std::string> containing;
  for (const auto& [id, v] : state.values) {
    if (!v.payload.is_string()) continue;
    std::string hay = normalize_text(v.payload.get<std::string>());
    if (hay.find(needle) != std::string::npos) containing.push_back(id);
  }
  if (!containing.empty()) return TransformMatch{std::move(containing), 1.0};

  // Stage two: the value is assembled from recorded strings; score by the
  // union of their occurrence intervals.
  std::vector<char> covered(needle.size(), 0);
  std::vector<std::string> sources;
  for (const auto& [id, v] : state.values) {
    if (!v.payload.is_string()) continue;
    std::string part = normalize_text(v.payload.get<std::string>());
    if (part.size() < 4) continue;  // too short to be evidence
    bool contributed = false;
    std::size_t pos = needle.find(part);
    while (pos != std::string::npos) {
      std::fill(covered.begin() + static_cast<std::ptrdiff_t>(pos),
                covered.begin() + static_cast<std::ptrdiff_t>(pos + part.size()), 1);
      contributed = true;
      pos = needle.find(part, pos + 1);
    }
    if (contributed) sources.push_back(id);
  }
  if (sources.empty()) return std::nullopt;
  double score = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
                 static_cast<double>(needle.size());
  if (score < threshold) return std::nullopt;
  return TransformMatch{std::move(sources), score};
}

ResolutionResult resolve(const Json& value, const ProvenanceState& state,
                         std::optional<ArgRole> role, const ClassifierPlug* plug) {
  // Stage 1: exact match against user inputs and trusted constants.
  {
    std::vector<std::string> hits;
    for (const auto& [id, v] : state.values) {
      if (is_source_value(v) && v.payload == value) hits.push_back(id);
    }
    if (!hits.empty()) {
      ResolutionResult r;
      r.tag = merge_all(state, hits);
      r.method = ResolveMethod::ExactUser;
      r.confidence = 1.0;
      r.source_ids = std::move(hits);
      return r;
    }
  }

  // Stage 2: exact match against recorded tool or external values, by
  // payload or by object identifier.
  {
    std::vector<std::string> hits;
    for (const auto& [id, v] : state.values) {
      if (!is_source_value(v) && v.payload == value) hits.push_back(id);
    }
    if (hits.empty() && value.is_string() && state.has_value(value.get<std::string>())) {
      hits.push_back(value.get<std::string>());
    }
    if (!hits.empty()) {
      ResolutionResult r;
      r.tag = merge_all(state, hits);
      r.method = ResolveMethod::ExactTool;
      r.confidence = 1.0;
      r.source_ids = std::move(hits);
      return r;
    }
  }

  // Stage 3: high-confidence transformation of known sources.
  if (auto match = transform_match(value, state)) {
    ResolutionResult r;
    r.tag = merge_all(state, match->source_ids);
    r.method = ResolveMethod::Transform;
    r.confidence = match->score;
    r.source_ids = std::move(match->source_ids);
    return r;
  }

  // Stage 4: authority-bearing role with ambiguous provenance fails low.
  // A missing role is treated as authority-bearing.
  bool authority = !role.has_value() || role_always_authority(*role);
  if (authority) return conservative_result(value);

  // Stage 5: classifier plug, conservative below threshold.
  if (plug != nullptr && plug->classify) {
    std::vector<std::string> candidates;
    for (const auto& [id, v] : state.values) candidates.push_back(id);
    auto [chosen, confidence] = plug->classify(value, candidates, role);
    if (!chosen.empty() && confidence >= plug->confidence_threshold) {
      for (const auto& id : chosen) {
        if (!state.has_value(id)) return conservative_result(value);
      }
      ResolutionResult r;
      r.tag = merge_all(state, chosen);
      r.method = ResolveMethod::Classifier;
      r.confidence = confidence;
      r.source_ids = std::move(chosen);
      std::sort(r.source_ids.begin(), r.source_ids.end());
      return r;
    }
  }
  return conservative_result(value);
}

ResolverEval evaluate_resolver(const std::string& jsonl, const ProvenanceState& state,
                               const ClassifierPlug* plug) {
  ResolverEval eval;
  std::istringstream lines(jsonl);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json row = Json::parse(line);
    ProvenanceTag gold = tag_from_json(row.at("gold_tag"));
    std::optional<ArgRole> role;
    if (row.contains("role") && !row.at("role").is_null()) {
      role = parse_role(row.at("role").get<std::string>());
    }
    ResolutionResult got = resolve(row.at("value"), state, role, plug);
    ++eval.total;
    if (got.tag == gold) ++eval.exact;
    if (trust_leq(got.tag.trust, gold.trust)) ++eval.conservative;
  }
  return eval;
}

}  // namespace pact
