#pragma once

#include "semigroup_lab/catalog.hpp"
#include "semigroup_lab/certified_max.hpp"
#include "semigroup_lab/core.hpp"
#include "semigroup_lab/dichotomy.hpp"
#include "semigroup_lab/errors.hpp"
#include "semigroup_lab/hille_yosida.hpp"
#include "semigroup_lab/matrix_exponential.hpp"
#include "semigroup_lab/matrix_io.hpp"
#include "semigroup_lab/parallel.hpp"
#include "semigroup_lab/perturbation.hpp"
#include "semigroup_lab/schur.hpp"
#include "semigroup_lab/verdict.hpp"
