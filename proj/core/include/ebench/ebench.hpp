#pragma once

#include "ebench/analysis.hpp"
#include "ebench/clock.hpp"
#include "ebench/config.hpp"
#include "ebench/dataset.hpp"
#include "ebench/emissions.hpp"
#include "ebench/energy.hpp"
#include "ebench/error.hpp"
#include "ebench/loadgen.hpp"
#include "ebench/mockserv.hpp"
#include "ebench/plan.hpp"
#include "ebench/report.hpp"
#include "ebench/runner.hpp"
