#pragma once

// Umbrella header.

#include "fairalloc/bandit.hpp"
#include "fairalloc/config.hpp"
#include "fairalloc/environment.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/harness.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/random.hpp"
#include "fairalloc/rational.hpp"
