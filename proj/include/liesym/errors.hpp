#pragma once

#include <stdexcept>
#include <string>

namespace liesym {

/// Requested operation is not defined for the active realization or algebra.
class UnsupportedOperation : public std::logic_error {
public:
    explicit UnsupportedOperation(const std::string& what) : std::logic_error(what) {}
};

/// A point handed to a constrained-analysis routine violates the constraints
/// it is required to satisfy.
class ConstraintViolation : public std::runtime_error {
public:
    explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};

/// The numerical rank of a restricted two-form does not match the stratum.
class InconsistentStratum : public std::runtime_error {
public:
    explicit InconsistentStratum(const std::string& what) : std::runtime_error(what) {}
};

} // namespace liesym
