#pragma once

// Umbrella header for the ordered latent trait model library.

#include "olt/binary.hpp"
#include "olt/construct.hpp"
#include "olt/errors.hpp"
#include "olt/estimate.hpp"
#include "olt/guttman.hpp"
#include "olt/io.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"
#include "olt/rng.hpp"
#include "olt/simulate.hpp"
#include "olt/verify.hpp"
