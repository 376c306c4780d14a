#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pact/jsonx.hpp"
#include "pact/monitor.hpp"
#include "pact/provenance.hpp"
#include "pact/roles.hpp"

namespace pact {

enum class ResolveMethod : std::uint8_t {
  ExactUser,
  ExactTool,
  Transform,
  Classifier,
  ConservativeFallback,
};

std::string_view resolve_method_name(ResolveMethod m);

struct ResolutionResult {
  ProvenanceTag tag;
  ResolveMethod method = ResolveMethod::ConservativeFallback;
  double confidence = 0.0;
  std::vector<std::string> source_ids;  // contributing recorded values, sorted
};

// Optional classifier slot for arguments the deterministic cascade cannot
// place. Answers below confidence_threshold are discarded in favor of the
// conservative fallback.
struct ClassifierPlug {
  std::function<std::pair<std::vector<std::string>, double>(
      const Json& payload, const std::vector<std::string>& candidate_ids,
      std::optional<ArgRole> role)>
      classify;
  double confidence_threshold = 0.8;
};

// Deterministic stub that always abstains; keeps the default pipeline
// hermetic.
ClassifierPlug abstaining_plug();

// Case-fold and collapse whitespace runs; the equivalence used by
// transform matching.
std::string normalize_text(const std::string& text);

struct TransformMatch {
  std::vector<std::string> source_ids;
  double score = 0.0;  // matched-coverage fraction of the normalized value
};

// Detects values assembled from recorded session strings: a normalized
// substring of one source scores 1.0; otherwise coverage is the union of
// occurrence intervals of recorded strings (normalized length >= 4) inside
// the value. Only scores >= threshold count.
std::optional<TransformMatch> transform_match(const Json& value, const ProvenanceState& state,
                                              double threshold = 0.9);

// Infers a provenance tag for a bare payload from session state: exact match
// against user inputs and trusted constants, then against recorded tool and
// external values (by payload or by object identifier), then transformation
// coverage, then a conservative EXTERNAL tag for authority-bearing roles,
// then the classifier plug with conservative fallback. Total function.
ResolutionResult resolve(const Json& value, const ProvenanceState& state,
                         std::optional<ArgRole> role,
                         const ClassifierPlug* plug = nullptr);

// Accuracy harness over labeled JSON lines {"value":..., "gold_tag":...,
// "role":...}: exact-tag agreement plus the count of resolutions that never
// exceed the gold trust.
struct ResolverEval {
  std::size_t total = 0;
  std::size_t exact = 0;
  std::size_t conservative = 0;  // resolved trust <= gold trust
};
ResolverEval evaluate_resolver(const std::string& jsonl, const ProvenanceState& state,
                               const ClassifierPlug* plug = nullptr);

}  // namespace pact
