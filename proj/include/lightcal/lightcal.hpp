#pragma once

#include "lightcal/characteristic.hpp"
#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"
#include "lightcal/io.hpp"
#include "lightcal/photometry.hpp"
#include "lightcal/solver.hpp"
#include "lightcal/synth.hpp"
