#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "dexlab/diversification.hpp"
#include "dexlab/equilibrium.hpp"
#include "dexlab/stability.hpp"

namespace dexlab {

// Economy specification file:
// {"beta": real, "horizon": int, "agents": [{"family": "log"|"isoelastic",
//  "sigma": real, "taste": [...], "endowment": [...]}]}
// Validation failures name the offending field path.
Economy economy_from_json(const nlohmann::json& j);
nlohmann::json economy_to_json(const Economy& e);
Economy load_economy(const std::string& path);
void save_economy(const Economy& e, const std::string& path);

nlohmann::json equilibrium_to_json(const EquilibriumResult& eq);
nlohmann::json stability_to_json(const StabilityReport& rep);
nlohmann::json diversification_to_json(const DiversificationReport& rep);

}  // namespace dexlab
