#pragma once

#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace wallbridge {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Input outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Iterative solver or quadrature did not reach its target.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computed quantity failed an internal consistency check.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class... Args>
std::string cat(const Args&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail

}  // namespace wallbridge
