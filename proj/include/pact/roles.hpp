#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pact {

// Closed six-value argument role enumeration.
// TARGET/COMMAND/CREDENTIAL are always authority-bearing, CONTENT never is;
// SELECTOR/CONTROL carry an explicit per-contract authority flag.
enum class ArgRole : std::uint8_t {
  Target = 0,
  Command = 1,
  Credential = 2,
  Content = 3,
  Selector = 4,
  Control = 5,
};

inline constexpr int kRoleCount = 6;

constexpr bool role_always_authority(ArgRole r) {
  return r == ArgRole::Target || r == ArgRole::Command || r == ArgRole::Credential;
}

std::string_view role_name(ArgRole role);
std::optional<ArgRole> role_from_name(std::string_view name);
// Throws ParseError on unknown names.
ArgRole parse_role(std::string_view name);

}  // namespace pact
