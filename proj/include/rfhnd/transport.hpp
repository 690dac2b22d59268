#pragma once

#include <span>

#include "rfhnd/matrix.hpp"

namespace rfhnd {

struct TransportResult {
  double cost = 0.0;
  Matrix plan;  // supply x demand flow
  int pivots = 0;
};

/// Exact balanced transportation problem by the transportation simplex
/// (northwest-corner start, MODI potentials, Bland's rule once the pivot count
/// suggests cycling). Supplies and demands must be nonnegative with equal
/// totals (to 1e-9 relative); costs must be finite.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const Matrix& cost);

}  // namespace rfhnd
