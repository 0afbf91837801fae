#include "ddh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddh {

Vector random_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

BlockState random_state(const Grid& grid, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  BlockState h;
  h.rho = random_vector(n, rng);
  h.sigma = random_vector(n, rng);
  h.tau = random_vector(n, rng);
  return h;
}

DualResidual random_dual(const Grid& grid, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  DualResidual g;
  g.g1 = random_vector(n, rng);
  g.g2 = random_vector(n, rng);
  g.g3 = random_vector(n, rng);
  return g;
}

BlockState random_smooth_state(const Grid& grid, Rng& rng, int max_modes_x, int max_modes_y) {
  const int kx = std::min(max_modes_x, grid.spec().nx - 1);
  const int ky = std::min(max_modes_y, grid.spec().ny - 1);
  const double L = grid.spec().length;
  const double d = grid.spec().width;
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto component = [&]() {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(grid.num_interior()));
    for (int k = 1; k <= kx; ++k) {
      for (int l = 1; l <= ky; ++l) {
        const double a = normal(rng);
        for (std::size_t q = 0; q < grid.num_interior(); ++q) {
          const int g = grid.interior_nodes()[q];
          v[static_cast<Eigen::Index>(q)] +=
              a * std::sin(k * std::numbers::pi * grid.x(g) / L) * std::sin(l * std::numbers::pi * grid.y(g) / d);
        }
      }
    }
    return v;
  };
  // Each component gets its own random share of the norm; otherwise the
  // Laplacian norm of rho dominates and the sigma, tau directions vanish.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BlockState h;
  h.rho = component();
  h.sigma = component();
  h.tau = component();
  h.rho *= unit(rng) / std::max(laplacian_norm(grid, h.rho), 1e-300);
  h.sigma *= unit(rng) / std::max(h10_norm(grid, h.sigma), 1e-300);
  h.tau *= unit(rng) / std::max(h10_norm(grid, h.tau), 1e-300);
  return h;
}

BlockState random_state_with_norm(const Grid& grid, Rng& rng, double norm) {
  BlockState h = random_state(grid, rng);
  h.rho /= laplacian_norm(grid, h.rho);
  h.sigma /= h10_norm(grid, h.sigma);
  h.tau /= h10_norm(grid, h.tau);
  h *= norm / norm_H(grid, h);
  return h;
}

BlockState random_state_in_ball(const Grid& grid, Rng& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * unit(rng);
  return random_state_with_norm(grid, rng, r);
}

BlockState random_smooth_state_in_ball(const Grid& grid, Rng& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * unit(rng);
  BlockState h = random_smooth_state(grid, rng);
  h *= r / norm_H(grid, h);
  return h;
}

}  // namespace ddh
