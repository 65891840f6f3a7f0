#pragma once

#include "planes3d/grouping.hpp"

namespace planes3d {

/// Flattens a labeled mesh onto its plane instances: every labeled vertex
/// moves along its plane's normal onto that plane, unlabeled vertices are
/// dropped, and only faces whose three corners share one instance survive.
/// Labels must be compact and instances[k] must describe label k.
TriMesh planarize(const TriMesh& mesh, const std::vector<PlaneInstance>& instances);

}  // namespace planes3d
