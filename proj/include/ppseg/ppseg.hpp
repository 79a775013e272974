#pragma once

#include "ppseg/bench.hpp"
#include "ppseg/contrasts.hpp"
#include "ppseg/core_model.hpp"
#include "ppseg/dp_engine.hpp"
#include "ppseg/evaluation.hpp"
#include "ppseg/io.hpp"
#include "ppseg/model_selection.hpp"
#include "ppseg/numeric.hpp"
#include "ppseg/parallel.hpp"
#include "ppseg/random.hpp"
#include "ppseg/simulation.hpp"
