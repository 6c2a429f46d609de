#pragma once

#include "srop/constraints.hpp"
#include "srop/grid.hpp"
#include "srop/io.hpp"
#include "srop/metrics.hpp"
#include "srop/simulate.hpp"
#include "srop/solver.hpp"
#include "srop/transform.hpp"
