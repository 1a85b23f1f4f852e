#include "cems/error.hpp"

namespace cems {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Data: return "data";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Config: return "config";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Estimation: return "estimation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

}  // namespace cems
