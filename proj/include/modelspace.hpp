#pragma once

#include "modelspace/errors.hpp"
#include "modelspace/types.hpp"
#include "modelspace/parallel.hpp"
#include "modelspace/polynomial.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/quadrature.hpp"
#include "modelspace/counting.hpp"
#include "modelspace/kernels.hpp"
#include "modelspace/clark.hpp"
#include "modelspace/analyzer.hpp"
#include "modelspace/serialization.hpp"
#include "modelspace/scenario.hpp"
