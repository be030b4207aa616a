#pragma once

#include "wkbref/config.hpp"
#include "wkbref/corrections.hpp"
#include "wkbref/error.hpp"
#include "wkbref/extraction.hpp"
#include "wkbref/oracle.hpp"
#include "wkbref/potentials.hpp"
#include "wkbref/quadrature.hpp"
#include "wkbref/spectrum.hpp"
#include "wkbref/tabulated.hpp"
