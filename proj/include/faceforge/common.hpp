#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace faceforge {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// exit codes; library code throws and never calls exit().
enum class ErrorKind {
    Usage,        // bad flags / bad arguments
    Config,       // config file invalid or schema violation
    Io,           // filesystem / serialization
    Shape,        // dimension or interval mismatch
    Numeric,      // non-finite values, failed convergence diagnostics
    Unsupported,  // operation not available on this backend/plugin
    Load,         // a pluggable backend failed to load
    Inference,    // a loaded backend failed while evaluating
    State,        // corrupt manifest / inconsistent on-disk state
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond)
        throw Error(kind, msg);
}

const char* error_kind_name(ErrorKind kind);

} // namespace faceforge
