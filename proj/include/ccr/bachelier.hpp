#ifndef CCR_BACHELIER_HPP
#define CCR_BACHELIER_HPP

#include <algorithm>
#include <cmath>

#include "ccr/rng.hpp"

namespace ccr {

// E[(m + s Z)^+] for standard normal Z and dispersion s = sigma * sqrt(time)
// (already scaled by any amortization factor). Closed form
//   m Phi(m/s) + s phi(m/s).
inline double expected_positive_part(double m, double s) {
    if (s <= 0.0) return m > 0.0 ? m : 0.0;
    const double d = m / s;
    return m * norm_cdf(d) + s * norm_pdf(d);
}

// E[|m + s Z|] = E[(..)^+] + E[(..)^-].
inline double expected_abs(double m, double s) {
    return expected_positive_part(m, s) + expected_positive_part(-m, s);
}

// E[(|m + s Z| - cap)^+], the expected liquidity loss above a haircut cap.
inline double expected_abs_excess(double m, double s, double cap) {
    if (cap <= 0.0) return expected_abs(m, s);
    return expected_positive_part(m - cap, s) + expected_positive_part(-m - cap, s);
}

} // namespace ccr

#endif
