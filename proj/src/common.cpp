#include "faceforge/common.hpp"

namespace faceforge {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Load: return "load";
    case ErrorKind::Inference: return "inference";
    case ErrorKind::State: return "state";
    }
    return "unknown";
}

} // namespace faceforge
