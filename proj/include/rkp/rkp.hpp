#pragma once

#include "rkp/error.hpp"
#include "rkp/experiments.hpp"
#include "rkp/gmres.hpp"
#include "rkp/lu.hpp"
#include "rkp/matrix.hpp"
#include "rkp/matrix_market.hpp"
#include "rkp/neumann.hpp"
#include "rkp/perturbation.hpp"
#include "rkp/qr.hpp"
#include "rkp/rng.hpp"
#include "rkp/solvers.hpp"
#include "rkp/svd.hpp"
#include "rkp/testgen.hpp"
