#ifndef CCR_ERRORS_HPP
#define CCR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ccr {

// Parameter outside its admissible range (negative hazard, recovery
// outside [0,1], non-positive maturity, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// The 3x3 correlation matrix over (exposure driver, trigger_C, trigger_B)
// is not positive semi-definite.
class NonPsdCorrelation : public DomainError {
public:
    explicit NonPsdCorrelation(const std::string& what) : DomainError(what) {}
};

// A payoff evaluated to NaN/inf on some path.
class NonFinitePayoff : public std::runtime_error {
public:
    explicit NonFinitePayoff(const std::string& what) : std::runtime_error(what) {}
};

// Adaptive refinement exhausted its evaluation budget before reaching
// the requested tolerance.
class QuadratureFailure : public std::runtime_error {
public:
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

// Tranche premium leg has non-positive expected notional (tranche wiped
// out almost surely).
class DegeneratePool : public std::runtime_error {
public:
    explicit DegeneratePool(const std::string& what) : std::runtime_error(what) {}
};

class ConfigParseError : public std::runtime_error {
public:
    explicit ConfigParseError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ccr

#endif
