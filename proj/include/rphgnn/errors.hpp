#pragma once

#include <stdexcept>
#include <string>

namespace rphgnn {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or corrupt on-disk data: bad magic, truncated files,
// inconsistent headers, provenance-hash mismatches.  CLI exit code 2.
struct FormatError : Error {
  using Error::Error;
};

// Invalid configuration or arguments: unknown scheme, non-positive
// iteration count, missing feature tables, shape mismatches.  CLI exit code 3.
struct ConfigError : Error {
  using Error::Error;
};

// A configurable resource cap was exceeded (e.g. the enumerated-relation
// cap of the two-hop scheme).  CLI exit code 4.
struct CapError : Error {
  using Error::Error;
};

}  // namespace rphgnn
