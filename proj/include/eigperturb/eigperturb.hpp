#pragma once

#include "errors.hpp"
#include "linalg.hpp"
#include "canonical.hpp"
#include "perturb_core.hpp"
#include "delta_hermitian.hpp"
#include "hamiltonian.hpp"
#include "verifier.hpp"
#include "generate.hpp"
