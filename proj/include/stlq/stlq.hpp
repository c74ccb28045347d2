#pragma once

#include "stlq/error.hpp"
#include "stlq/random.hpp"
#include "stlq/stl/formula.hpp"
#include "stlq/stl/parser.hpp"
#include "stlq/stl/semantics.hpp"
#include "stlq/grid/gridworld.hpp"
#include "stlq/tau/tau_state.hpp"
#include "stlq/learn/reward.hpp"
#include "stlq/learn/q_learning.hpp"
#include "stlq/learn/value_iteration.hpp"
#include "stlq/bounds/log_sum_exp.hpp"
#include "stlq/eval/evaluation.hpp"
#include "stlq/io/config.hpp"
#include "stlq/io/artifacts.hpp"
