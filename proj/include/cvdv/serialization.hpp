#pragma once

#include <iosfwd>
#include <span>

#include <json.hpp>

#include "cvdv/fock.hpp"
#include "cvdv/measurement.hpp"
#include "cvdv/tomography.hpp"

namespace cvdv {

using Json = nlohmann::ordered_json;

/// {"kind": "fock_state", "mode_dims", "mode_labels", "amplitudes": [re, im, ...]}
Json to_json(const FockState& state);
/// {"kind": "density_operator", ..., "matrix": row-major [re, im, ...]}
Json to_json(const DensityOperator& rho);

FockState fock_state_from_json(const Json& j);
DensityOperator density_operator_from_json(const Json& j);

/// {"dim", "mode", "re", "im", "converged", "iterations", "log_likelihood", "warnings"}
Json tomography_report(const TomographyResult& result);

/// `#schema-version 1 likelihood-trace`, then `iteration,log_likelihood`.
void write_likelihood_trace_csv(std::ostream& out, std::span<const double> trace);

/// `#schema-version 1 wigner-grid`, an axis row
/// `x_min,x_max,x_steps,p_min,p_max,p_steps`, then one row per p value.
void write_wigner_csv(std::ostream& out, const WignerGrid& grid);

}  // namespace cvdv
