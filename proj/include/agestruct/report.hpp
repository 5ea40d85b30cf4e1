#pragma once

#include <nlohmann/json.hpp>

#include "agestruct/dynamics.hpp"
#include "agestruct/model.hpp"
#include "agestruct/oracle.hpp"
#include "agestruct/reproduction.hpp"

namespace agestruct {

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const EquilibriumReport& report);
nlohmann::json to_json(const MonitorReport& report);
nlohmann::json to_json(const BoundCheck& check);

}  // namespace agestruct
