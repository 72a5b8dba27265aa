#pragma once

#include <string>

#include "lmaflow/flow.hpp"

namespace lmaflow {

/// Comma-separated trace with header
///   t,mu_min,mu_max,sup_sigma,sup_d3_sq,sup_d4_sq,flow_residual
/// plus ,ln_det_g_sup,phase_range when the records carry metric columns.
void write_trace(const FlowTrace& trace, const std::string& path);

FlowTrace read_trace(const std::string& path);

}  // namespace lmaflow
