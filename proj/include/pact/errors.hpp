#pragma once

#include <stdexcept>
#include <string>

namespace pact {

// Call arity or tool/argument name disagreement between a call and its contract.
struct SchemaMismatch : std::runtime_error {
  explicit SchemaMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or empty tool schema handed to synthesis.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Certificate bound to a different value than the one being discharged.
struct CertMismatch : std::runtime_error {
  explicit CertMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Certificate already consumed; discharge certificates are single-use.
struct CertConsumed : std::runtime_error {
  explicit CertConsumed(const std::string& what) : std::runtime_error(what) {}
};

// Origin id reused for a new source event within one session.
struct DuplicateOrigin : std::runtime_error {
  explicit DuplicateOrigin(const std::string& what) : std::runtime_error(what) {}
};

// Malformed JSON input (contracts, schemas, scenarios, states).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed scenario trace (unknown refs, missing fields, bad step order).
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Suite-level failure (e.g. empty corpus).
struct SuiteError : std::runtime_error {
  explicit SuiteError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pact
