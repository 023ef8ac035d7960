#pragma once

#include <json.hpp>

#include "kronord/modk.hpp"
#include "kronord/order.hpp"

namespace kronord {

using Json = nlohmann::json;

Json matrix_to_json(const QMatrix& M);
QMatrix matrix_from_json(const Json& j);
Json lattice_to_json(const Lattice& L);
Lattice lattice_from_json(const Json& j);
Json modk_to_json(const ModK& M);
ModK modk_from_json(const Json& j);
Json decomposition_to_json(const Decomposition& d);
Decomposition decomposition_from_json(const Json& j);

}  // namespace kronord
