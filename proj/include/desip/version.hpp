#pragma once

namespace desip {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the report layout changes in a way `report` cannot merge.
inline constexpr int kReportSchemaVersion = 1;

}  // namespace desip
