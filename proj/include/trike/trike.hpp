#pragma once

// Umbrella header for the trike control toolkit.

#include "trike/errors.hpp"
#include "trike/polynomial.hpp"
#include "trike/transfer_function.hpp"
#include "trike/state_space.hpp"
#include "trike/discrete.hpp"
#include "trike/time_series.hpp"
#include "trike/simulate.hpp"
#include "trike/pid.hpp"
#include "trike/kinematics.hpp"
#include "trike/spectrum.hpp"
#include "trike/sysid.hpp"
#include "trike/bldc.hpp"
#include "trike/robot_sim.hpp"
