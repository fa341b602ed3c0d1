#pragma once

#include "ftprl/feasible_set.hpp"

namespace ftprl {

/// Weighted projection argmin_{x in F} ||A (x - u)||_2 for a positive
/// definite diagonal A.
///
/// Boxes and L-infinity balls separate across coordinates and are exact
/// clamps. Euclidean balls use radial scaling when A is a multiple of the
/// identity and a bisection on the KKT multiplier otherwise. Ellipsoids
/// {x : ||Mx||_2 <= 1} are solved through the same multiplier bisection with
/// a dense n x n solve per step. Other Lp balls fall back to projected
/// gradient and are meant for diagnostics, not the hot path.
///
/// Throws InvalidArgument when A is not positive definite, on dimension
/// mismatch, and for transformed balls with p != 2.
Vector project(const FeasibleSet& f, const DiagPSD& a, const Vector& u);

/// Euclidean projection onto {x : ||x||_p <= radius}.
Vector euclidean_project_lp_ball(const Vector& u, NormExponent p, double radius);

}  // namespace ftprl
