#pragma once

#include "fcop/simulation/sampling.hpp"
#include "fcop/simulation/study.hpp"
