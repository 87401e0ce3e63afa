#pragma once

#include <string>

#include "inrflow/fem.hpp"

namespace inrflow {

// Legacy ASCII unstructured-grid snapshot: leaves as quad/hex cells, nodal
// `velocity` (3 components, z = 0 in 2D) and `pressure`, cell-data `marker`.
void write_vtk(const Octree& tree, const ElementMarkers& markers, const FlowState& state,
               const std::string& path, const std::string& title = "inrflow");

}  // namespace inrflow
