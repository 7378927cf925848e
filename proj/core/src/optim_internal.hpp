#pragma once

#include "pspin/hamiltonian.hpp"
#include "pspin/rng.hpp"

namespace pspin::detail {

Vector uniform_on_sphere(int n, double radius, RandomStream& rng);
Vector orthogonal_unit(const Vector& v, const Vector& m);
int step_count(double delta);

}  // namespace pspin::detail
