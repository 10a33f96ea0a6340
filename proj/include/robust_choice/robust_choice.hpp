#pragma once

#include "robust_choice/decision_problems.hpp"
#include "robust_choice/divergences.hpp"
#include "robust_choice/errors.hpp"
#include "robust_choice/extended.hpp"
#include "robust_choice/model_space.hpp"
#include "robust_choice/preferences.hpp"
#include "robust_choice/simplex.hpp"
#include "robust_choice/solver.hpp"
