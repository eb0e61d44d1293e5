#pragma once

#include "emqs/error.hpp"
#include "emqs/grid.hpp"
#include "emqs/incidence.hpp"
#include "emqs/material.hpp"
#include "emqs/formulation.hpp"
#include "emqs/hamiltonian.hpp"
#include "emqs/linear_solver.hpp"
#include "emqs/source.hpp"
#include "emqs/integrator.hpp"
#include "emqs/dense_oracle.hpp"
#include "emqs/diagnostics.hpp"
#include "emqs/matrix_market.hpp"
#include "emqs/scenario.hpp"
#include "emqs/report_io.hpp"
