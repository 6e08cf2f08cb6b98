#pragma once

#include <functional>

#include "mfg/grid.hpp"

namespace mfg {

// Feedback control u(t, x, mu). Policies that ignore the measure (fields
// produced by the HJB sweep, constants) just drop the third argument.
using Policy = std::function<double(double, double, const MeasureRef&)>;

inline Policy zero_policy() {
    return [](double, double, const MeasureRef&) { return 0.0; };
}

inline Policy constant_policy(double u) {
    return [u](double, double, const MeasureRef&) { return u; };
}

}  // namespace mfg
