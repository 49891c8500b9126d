#pragma once

#include "doctest.h"

namespace oracle {

// Relative tolerance for closed-form arithmetic checks.
inline constexpr double kRelative = 1e-6;

inline doctest::Approx approx(double value) { return doctest::Approx(value).epsilon(kRelative); }

}  // namespace oracle
