#include "htpv/error.hpp"

namespace htpv {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::not_found: return "not-found";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::config: return "config";
        case ErrorKind::range: return "range";
        case ErrorKind::undefined: return "undefined";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace htpv
