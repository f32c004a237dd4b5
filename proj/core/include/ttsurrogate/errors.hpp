#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttsurrogate {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible shapes, ranks or core counts.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Multi-index outside the physical dimensions of a tensor train.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation
/// (query outside the grid, degenerate interval, nonpositive spot...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is (numerically) singular.
class SingularError : public Error {
public:
    static constexpr std::size_t no_bond = std::numeric_limits<std::size_t>::max();

    explicit SingularError(const std::string& what, std::size_t bond = no_bond)
        : Error(what), bond_(bond) {}

    /// Bond between core `bond` and `bond + 1`, or `no_bond` outside TT-cross.
    std::size_t bond() const noexcept { return bond_; }

private:
    std::size_t bond_;
};

/// Dense factorization failed even after the jitter fallback.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Models or portfolio positions built on different grids.
class IncompatibleGridError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated serialized data.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Failure inside a black-box pricer, tagged with the multi-index being priced.
class PricerError : public Error {
public:
    PricerError(const std::string& what, std::vector<std::size_t> index)
        : Error(what), index_(std::move(index)) {}

    const std::vector<std::size_t>& index() const noexcept { return index_; }

private:
    std::vector<std::size_t> index_;
};

}  // namespace ttsurrogate
