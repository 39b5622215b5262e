#pragma once

#include <json.hpp>
#include <ostream>

#include "krip/kr_operator.hpp"
#include "krip/rip.hpp"

namespace krip {

/// {s, delta, method, witness, trials, seed} record.
nlohmann::json rip_estimate_json(const RipEstimate& estimate);

/// Operator header (n, N, mode, kappa, scale, family, seed, representation)
/// for cross-tool exchange.
nlohmann::json operator_metadata(const KrOperator& op);

/// Writes the explicit n^2 x N matrix as plain CSV rows. Requires the
/// explicit representation.
void write_operator_csv(const KrOperator& op, std::ostream& out);

}  // namespace krip
