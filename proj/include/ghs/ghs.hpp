#pragma once

#include "ghs/basis.hpp"
#include "ghs/error.hpp"
#include "ghs/harness.hpp"
#include "ghs/io.hpp"
#include "ghs/moments.hpp"
#include "ghs/sampler.hpp"
