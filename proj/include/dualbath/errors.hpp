// errors.hpp — exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace dualbath {

// Invalid parameters or configuration. `field` names the offending input.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Quadrature failure, NaN or divergence during propagation.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dualbath
