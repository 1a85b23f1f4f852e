#pragma once

#include <stdexcept>
#include <string>

namespace cems {

enum class ErrorKind {
    Schema,      // column counts / names do not match
    Data,        // non-finite or unparsable values
    Parameter,   // an argument is out of its allowed range
    Config,      // invalid run configuration
    Geometry,    // degenerate neighborhood, shape mismatch in projections
    Numeric,     // a solve produced or received non-finite values
    Estimation,  // intrinsic dimension could not be estimated
    Io,
    Internal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace cems
