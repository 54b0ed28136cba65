#pragma once

#include <json.hpp>

#include "spamsift/chaid.hpp"

namespace spamsift::detail {

nlohmann::json chaid_config_to_json(const ChaidConfig& config);
/// Missing keys keep their defaults. Throws ConfigError on bad values.
ChaidConfig chaid_config_from_json(const nlohmann::json& doc);

}  // namespace spamsift::detail
