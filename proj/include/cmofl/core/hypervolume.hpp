#pragma once

#include <cstddef>
#include <vector>

#include "cmofl/core/objectives.hpp"

namespace cmofl {

// Reference point z bounding the measured region from above.
using ReferencePoint = std::vector<double>;

// Exact hypervolume of the union of boxes [y, z] for m in {2, 3}.
// Points that exceed z in any coordinate are left out of the union.
double hypervolume(const std::vector<ObjectiveVector>& points,
                   const ReferencePoint& z);

// Number of points hypervolume() would leave out for z.
std::size_t count_outside_reference(const std::vector<ObjectiveVector>& points,
                                    const ReferencePoint& z);

}  // namespace cmofl
