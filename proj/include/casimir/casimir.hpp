#pragma once

// Umbrella header for the whole library.

#include "casimir/circulation.hpp"
#include "casimir/errors.hpp"
#include "casimir/euler_torus.hpp"
#include "casimir/fixtures.hpp"
#include "casimir/io.hpp"
#include "casimir/json_io.hpp"
#include "casimir/measure.hpp"
#include "casimir/moments.hpp"
#include "casimir/morse.hpp"
#include "casimir/orbit.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/reeb.hpp"
#include "casimir/surface.hpp"
#include "casimir/union_find.hpp"
