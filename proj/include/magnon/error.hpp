#pragma once

#include <stdexcept>
#include <string>

namespace magnon {

/// Malformed input: bad configuration, unreadable files, violated
/// preconditions on user-supplied data, size caps exceeded.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A scientific condition failed: parameters outside the ferromagnetic
/// regime, no self-consistent magnetization, undefined spectrum.
class RegimeError : public std::runtime_error {
public:
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace magnon
