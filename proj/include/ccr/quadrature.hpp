#ifndef CCR_QUADRATURE_HPP
#define CCR_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>

#include "ccr/errors.hpp"

namespace ccr {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_floor = 1e-16;     // below this scale, absolute accuracy suffices
    std::size_t max_evals = 200000;
};

// Adaptive Simpson integration of f over [a, b]. Throws QuadratureFailure
// when the evaluation budget runs out before the tolerance is met.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt = {});

// Same, with the substitution t = v^2 applied on [0, b]: removes the sqrt(t)
// kink that the time integrands of the reference model all carry at 0.
double integrate_sqrt_time(const std::function<double(double)>& f, double b,
                           const QuadratureOptions& opt = {});

// Expectation of g(z) under the standard normal law, by adaptive integration
// of g(z) phi(z) over |z| <= z_max.
double gauss_expectation(const std::function<double(double)>& g,
                         const QuadratureOptions& opt = {}, double z_max = 8.5);

} // namespace ccr

#endif
