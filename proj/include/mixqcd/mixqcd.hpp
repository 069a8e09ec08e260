#pragma once

#include "mixqcd/changepoint.hpp"
#include "mixqcd/empirical.hpp"
#include "mixqcd/errors.hpp"
#include "mixqcd/estimation.hpp"
#include "mixqcd/family.hpp"
#include "mixqcd/finance.hpp"
#include "mixqcd/gof.hpp"
#include "mixqcd/metrics.hpp"
#include "mixqcd/mixture.hpp"
#include "mixqcd/simharness.hpp"
#include "mixqcd/weights.hpp"
