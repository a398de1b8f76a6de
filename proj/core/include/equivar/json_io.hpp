#pragma once

#include <json.hpp>

#include "equivar/deform.hpp"
#include "equivar/energyvar.hpp"
#include "equivar/harmonicflow.hpp"
#include "equivar/meshcover.hpp"
#include "equivar/repvar.hpp"
#include "equivar/twistedhodge.hpp"

namespace equivar {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Matrices are arrays of rows; an entry is a number or an [re, im] pair.
// Readers throw std::invalid_argument on malformed input.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json mesh_to_json(const CoverMesh& mesh);
CoverMesh mesh_from_json(const Json& j);

Json rep_to_json(const Representation& rho);
Representation rep_from_json(const Json& j);

Json cocycle_to_json(const Cocycle& c);
Cocycle cocycle_from_json(const Json& j, const Representation& rho);
Json jet_to_json(const Jet2Cocycle& ck);
Jet2Cocycle jet_from_json(const Json& j, const Representation& rho);

Json map_to_json(const EquivariantMap& f);
EquivariantMap map_from_json(const Json& j);

Json cochain_to_json(const TwistedCochain& x);
TwistedCochain cochain_from_json(const Json& j);

Json to_json(const ValidationReport& r);
Json to_json(const FlowReport& r, bool with_history = false);
Json to_json(const ObstructionResult& r);
Json to_json(const FdEstimate& r);
Json to_json(const VariationReport& r);
Json to_json(const PshResult& r);

}  // namespace equivar
