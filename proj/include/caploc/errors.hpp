#pragma once

#include <stdexcept>
#include <string>

namespace caploc {

/// Base class of all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation precondition. The CLI maps this to exit
/// code 2 (invalid arguments).
struct InvalidArgument : Error {
    using Error::Error;
};

/// Input data is malformed, incomplete, or degenerate (missing grid cells,
/// unidentifiable fit, flat maps). The CLI maps this to exit code 1.
struct DataError : Error {
    using Error::Error;
};

/// Filesystem or parsing failure. The CLI maps this to exit code 1.
struct IoError : Error {
    using Error::Error;
};

}  // namespace caploc
