#pragma once

#include "pbf/analysis.hpp"
#include "pbf/bit_vector.hpp"
#include "pbf/errors.hpp"
#include "pbf/filter.hpp"
#include "pbf/hashing.hpp"
#include "pbf/montecarlo.hpp"
#include "pbf/murmur3.hpp"
#include "pbf/random.hpp"
#include "pbf/serialize.hpp"
#include "pbf/tables.hpp"
