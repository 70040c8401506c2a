#pragma once

#include <cstdint>
#include <vector>

#include "scurv/mm_space.hpp"

namespace scurv {

/// Sample of the round n-sphere of sectional curvature `sec` with total mass
/// equal to its volume.
///
/// Lattice and stratified modes place one atom per cell of a zonal partition
/// into nearly equal, nearly isotropic cells (n = 2: polar bands; n = 3: Hopf
/// slabs), at the cell center or uniformly inside the cell. Each atom carries
/// its cell volume, and the atom count is only close to `count`. The iid mode
/// uses normalized Gaussian vectors with equal masses and works in every
/// dimension. Every mode applies a seeded random rotation; seed 0 keeps the
/// grid axis-aligned.
FiniteMMSpace sphere_sample(int n, double sec, int count, Sampling mode = Sampling::stratified,
                            std::uint64_t seed = 1);

/// Cell-center grid on the flat torus prod [0, L_k) with masses equal to cell volumes.
FiniteMMSpace flat_torus_grid(const std::vector<double>& lengths, const std::vector<int>& counts);

/// Area-uniform stratified sample of the hyperbolic disk of radius `rho`
/// (curvature -1), total mass 2 pi (cosh rho - 1).
FiniteMMSpace hyperbolic_disk(double rho, int count, Sampling mode = Sampling::stratified,
                              std::uint64_t seed = 1);

/// Cell-center grid of the segment [0, length] with cell-length masses.
FiniteMMSpace interval_grid(double length, int count);

/// Single atom of the given mass.
FiniteMMSpace point_space(double mass = 1.0, int dim_hint = 1);

/// Random orthogonal matrix (Haar distributed) from a seeded generator.
Eigen::MatrixXd random_rotation(int n, std::uint64_t seed);

}  // namespace scurv
