#pragma once

#include <string>

#include "json.hpp"

#include "bimagelsh/engine.hpp"
#include "bimagelsh/index.hpp"
#include "bimagelsh/model.hpp"

namespace bimagelsh {

nlohmann::json params_to_json(const Params& params);
Params params_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const IndexManifest& manifest);
/// Throws FormatError on malformed or incomplete manifests.
IndexManifest manifest_from_json_text(const std::string& text);

/// Wall time is only emitted when `include_timing` is set, so reports of
/// identical queries compare equal byte for byte.
nlohmann::json query_report_to_json(const QueryReport& report, bool include_timing = false);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace bimagelsh
