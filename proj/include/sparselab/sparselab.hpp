#pragma once

#include "collections.hpp"
#include "covers.hpp"
#include "directional.hpp"
#include "experiments.hpp"
#include "meas_set.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "rational.hpp"
#include "reference.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "space.hpp"
#include "stratify.hpp"
