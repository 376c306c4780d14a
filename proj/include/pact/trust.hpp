#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pact {

// Trust lattice. Total order: EXTERNAL < TOOL_OUTPUT < USER < TRUSTED.
// Meet of two levels is the numeric minimum.
enum class TrustLevel : std::uint8_t {
  External = 0,
  ToolOutput = 1,
  User = 2,
  Trusted = 3,
};

inline constexpr TrustLevel kTrustBottom = TrustLevel::External;
inline constexpr TrustLevel kTrustTop = TrustLevel::Trusted;

constexpr bool trust_leq(TrustLevel a, TrustLevel b) {
  return static_cast<std::uint8_t>(a) <= static_cast<std::uint8_t>(b);
}

constexpr TrustLevel trust_min(TrustLevel a, TrustLevel b) {
  return trust_leq(a, b) ? a : b;
}

std::string_view trust_name(TrustLevel level);
std::optional<TrustLevel> trust_from_name(std::string_view name);
// Throws ParseError on unknown names.
TrustLevel parse_trust(std::string_view name);

}  // namespace pact
