#pragma once

#include <cmath>

namespace facetlm::detail {

inline constexpr int kTieKeyBits = 40;

/// Rounds v to kTieKeyBits of mantissa. Orderings compare these keys so that
/// values equal up to floating-point noise tie and fall back to document id.
inline double tie_key(double v)
{
    if (!std::isfinite(v) || v == 0.0) {
        return v;
    }
    int exponent = 0;
    double mantissa = std::frexp(v, &exponent);
    mantissa = std::round(std::ldexp(mantissa, kTieKeyBits));
    return std::ldexp(mantissa, exponent - kTieKeyBits);
}

}  // namespace facetlm::detail
