#pragma once

#include <stdexcept>
#include <string>

namespace nsreg {

// Evaluation outside a field's domain or at a declared singular point.
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Violated operation precondition or malformed configuration.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure at run time (NaN from an integrand, I/O, resource limits).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nsreg
