#pragma once

#include <json.hpp>

#include "biaslab/lingauss.hpp"

namespace biaslab {

// Matrices serialize as {"rows": r, "cols": c, "data": [row-major entries]}.
nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// {"F","G","Q","H","R"}
nlohmann::json to_json(const ContinuousModel& cm);
ContinuousModel continuous_model_from_json(const nlohmann::json& j);

// {"A","B","C","H","R","step"}
nlohmann::json to_json(const DiscreteModel& dm);
DiscreteModel discrete_model_from_json(const nlohmann::json& j);

// {"factor","window","base","Ac","Bc","Cc"}
nlohmann::json to_json(const CoarsenedModel& cm);
CoarsenedModel coarsened_model_from_json(const nlohmann::json& j);

}  // namespace biaslab
