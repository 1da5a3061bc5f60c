#pragma once

#include "h2mem/units.hpp"
#include "h2mem/error.hpp"
#include "h2mem/spectroscopy.hpp"
#include "h2mem/coherence.hpp"
#include "h2mem/pulse.hpp"
#include "h2mem/medium.hpp"
#include "h2mem/mbsolver.hpp"
#include "h2mem/protocol.hpp"
#include "h2mem/config.hpp"
#include "h2mem/io.hpp"
#include "h2mem/harness.hpp"
