#pragma once

#include "ftc/engine.hpp"

#include <string>
#include <vector>

namespace ftc {

/// Parse a YAML scenario document. An optional top-level `preset` names a
/// built-in scenario that the remaining keys override field by field.
/// Unknown keys, type errors and bad values throw ConfigError carrying the
/// 1-based line of the offending node.
Scenario parse_config(const std::string& text);
Scenario load_config(const std::string& path);

/// Fully expanded document (no preset key) that parses back to the same
/// scenario; numbers use the shortest representation that reads back
/// to the same double.
std::string emit_config(const Scenario& sc);

enum class OverrideMode { Set, Scale };

/// Apply `value` to the scalar (or every element of the vector/matrix) at a
/// dotted key path of the resolved document, e.g. "controller.gains.k1",
/// "funnel.0.mu0" or "initial.q"; a mapping applies to every leaf below
/// it, all of which must be numeric. Throws ConfigError for unknown paths.
Scenario with_override(const Scenario& sc, const std::string& path,
                       double value, OverrideMode mode);

}  // namespace ftc
