#pragma once

#include "opq/bench.hpp"
#include "opq/classify.hpp"
#include "opq/core.hpp"
#include "opq/derivation.hpp"
#include "opq/fit.hpp"
#include "opq/io.hpp"
#include "opq/profile.hpp"
#include "opq/sim.hpp"
