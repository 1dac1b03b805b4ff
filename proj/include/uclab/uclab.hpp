#pragma once

#include "uclab/error.hpp"
#include "uclab/jet.hpp"
#include "uclab/geometry.hpp"
#include "uclab/grid.hpp"
#include "uclab/closed_form.hpp"
#include "uclab/weights.hpp"
#include "uclab/nonlinearity.hpp"
#include "uclab/field.hpp"
#include "uclab/currents.hpp"
#include "uclab/quadrature.hpp"
#include "uclab/fit.hpp"
#include "uclab/decay.hpp"
#include "uclab/solver.hpp"
#include "uclab/verifier.hpp"
#include "uclab/config.hpp"
#include "uclab/report.hpp"
#include "uclab/run.hpp"
#include "uclab/battery.hpp"
