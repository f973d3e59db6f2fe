#pragma once

#include <stdexcept>
#include <string>

namespace powertherm {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system and input-data failures: missing files, unwritable sinks,
// malformed or invariant-violating rows in data files. CLI exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

// Estimation and model failures: rank deficiency, underdetermined systems,
// non-physical fit results, registry/key mismatches. CLI exit code 3.
class FitError : public Error {
public:
    using Error::Error;
};

// Invalid parameters or configuration values. CLI exit code 4.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace powertherm
