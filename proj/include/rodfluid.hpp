#pragma once

#include "rodfluid/config.hpp"
#include "rodfluid/coupling.hpp"
#include "rodfluid/ctmc.hpp"
#include "rodfluid/experiments.hpp"
#include "rodfluid/hydro.hpp"
#include "rodfluid/io.hpp"
#include "rodfluid/kinetics.hpp"
#include "rodfluid/limit_rw.hpp"
#include "rodfluid/model.hpp"
#include "rodfluid/oracle.hpp"
#include "rodfluid/parallel.hpp"
#include "rodfluid/random.hpp"
#include "rodfluid/rate_index.hpp"
#include "rodfluid/stats.hpp"
#include "rodfluid/trajectory.hpp"
