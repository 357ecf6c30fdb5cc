#pragma once

#include "flqkd/constants.hpp"
#include "flqkd/core_model.hpp"
#include "flqkd/error.hpp"
#include "flqkd/link_budget.hpp"
#include "flqkd/monitor.hpp"
#include "flqkd/security.hpp"
#include "flqkd/timetag/engine.hpp"
#include "flqkd/timetag/histogram.hpp"
#include "flqkd/timetag/io.hpp"
#include "flqkd/timetag/scenario.hpp"
