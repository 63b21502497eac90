#pragma once

#include "fcop/inference/fit.hpp"
#include "fcop/inference/likelihood.hpp"
#include "fcop/inference/marginals.hpp"
#include "fcop/inference/optimize.hpp"
