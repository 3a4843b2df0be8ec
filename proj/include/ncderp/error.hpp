#pragma once

#include <stdexcept>
#include <string>

namespace ncderp {

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file; carries the offending location.
class FormatError : public Error {
public:
    FormatError(const std::string& where, const std::string& what)
        : Error(where + ": " + what) {}
};

}  // namespace ncderp
