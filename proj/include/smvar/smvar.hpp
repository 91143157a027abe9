#pragma once

#include "smvar/radial.hpp"
#include "smvar/model.hpp"
#include "smvar/poisson.hpp"
#include "smvar/energy.hpp"
#include "smvar/bounds.hpp"
#include "smvar/solvers.hpp"
#include "smvar/config.hpp"
#include "smvar/commands.hpp"
