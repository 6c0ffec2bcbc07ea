#ifndef STARSL_COMMON_HPP
#define STARSL_COMMON_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace starsl {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real kPi = std::numbers::pi_v<Real>;

// Error taxonomy; the CLI maps these to exit codes 2/3/4.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A hypothesis of the reconstruction method fails on the given data.
class AssumptionViolation : public std::runtime_error {
public:
    explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline bool nearly_equal(Real a, Real b, Real tol) { return std::abs(a - b) <= tol; }

}  // namespace starsl

#endif
