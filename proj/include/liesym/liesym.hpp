#pragma once

// Hamiltonian dynamics on Lie group cotangent bundles under canonical,
// cocycle-shifted and doubly-extended symplectic structures, with degeneracy
// detection and presymplectic constraint analysis for SU(2).

#include "liesym/algebra.hpp"
#include "liesym/cocycle.hpp"
#include "liesym/dynamics.hpp"
#include "liesym/errors.hpp"
#include "liesym/gnh.hpp"
#include "liesym/group.hpp"
#include "liesym/observables.hpp"
#include "liesym/run.hpp"
#include "liesym/scenario.hpp"
#include "liesym/symplectic.hpp"
