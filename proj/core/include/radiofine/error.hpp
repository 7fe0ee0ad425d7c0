#pragma once

#include <stdexcept>
#include <string>

namespace radiofine {

// Base for every failure raised by the library. The CLI maps the concrete
// subclass onto its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that violates a domain invariant (bad curve rows, no matches, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Unreadable or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
};

// Invalid parameters supplied by a caller.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace radiofine
