#pragma once

#include "rse/compact_set.hpp"
#include "rse/vector_map.hpp"

namespace rse {

/// Polar-coordinate demonstration map on [1,2] x [0, pi/4]:
///   Phi(r, th) = ( (r cos th, r sin th), tan th, th )  in R^{(2,1,1)}.
/// Not 2-redundant: single blocks 2 and 3 drop the radius.
VectorMap make_polar_map();

/// Same map with block 1 normalized to (cos th, sin th): every block now
/// determines th alone, making the map 2-redundant on the domain.
VectorMap make_projected_polar_map();

CompactSetSpec polar_domain();

}  // namespace rse
