#pragma once

#include <cmath>
#include <limits>

namespace robust_choice {

/// Positive infinity used as the extended value of penalties and as the
/// lambda sentinel for the misspecification-neutral case.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite(double x) { return std::isinf(x); }

/// Product under the convention 0 * inf = 0.
inline double extended_mul(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

/// Sum that absorbs infinities (never produces NaN from inf + -inf;
/// penalties are nonnegative so that case cannot arise here).
inline double extended_add(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return kInfinity;
    return a + b;
}

} // namespace robust_choice
