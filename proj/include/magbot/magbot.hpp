#pragma once

#include "magbot/actuation.hpp"
#include "magbot/crosstalk.hpp"
#include "magbot/dynamics.hpp"
#include "magbot/magnetics.hpp"
#include "magbot/pose.hpp"
#include "magbot/scenario_io.hpp"
#include "magbot/version.hpp"
