#pragma once

#include <random>

#include "ddh/system.hpp"

namespace ddh {

using Rng = std::mt19937_64;

/// i.i.d. standard normal nodal values.
Vector random_vector(Eigen::Index n, Rng& rng);
BlockState random_state(const Grid& grid, Rng& rng);
DualResidual random_dual(const Grid& grid, Rng& rng);

/// Random combination of the lowest sine modes sin(k pi x/L) sin(l pi y/d),
/// k <= max_modes_x, l <= max_modes_y (clipped to the grid), for each component.
BlockState random_smooth_state(const Grid& grid, Rng& rng, int max_modes_x = 8, int max_modes_y = 3);

/// Random state rescaled to the given H norm, components balanced in norm.
BlockState random_state_with_norm(const Grid& grid, Rng& rng, double norm);
/// Random state uniformly distributed in radius inside the H ball of radius R.
BlockState random_state_in_ball(const Grid& grid, Rng& rng, double radius);
/// Smooth variant of random_state_in_ball.
BlockState random_smooth_state_in_ball(const Grid& grid, Rng& rng, double radius);

}  // namespace ddh
