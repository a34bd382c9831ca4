#pragma once

#include "bornopp/core.hpp"
#include "bornopp/grid.hpp"
#include "bornopp/indicators.hpp"
#include "bornopp/models.hpp"
#include "bornopp/bands.hpp"
#include "bornopp/hamiltonians.hpp"
#include "bornopp/eigensolver.hpp"
#include "bornopp/propagation.hpp"
#include "bornopp/semiclassics.hpp"
#include "bornopp/identities.hpp"
#include "bornopp/states.hpp"
#include "bornopp/fit.hpp"
