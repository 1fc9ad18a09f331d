// Umbrella header.
#pragma once

#include "core.hpp"
#include "evalmetrics.hpp"
#include "inference.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "simgen.hpp"

namespace linkedggm {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace linkedggm
