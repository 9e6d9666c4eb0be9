#pragma once

// Umbrella header.

#include "slaq/bench.hpp"
#include "slaq/descriptors.hpp"
#include "slaq/error.hpp"
#include "slaq/graph.hpp"
#include "slaq/json_io.hpp"
#include "slaq/lanczos.hpp"
#include "slaq/numeric.hpp"
#include "slaq/operators.hpp"
#include "slaq/slq.hpp"
