#include "grlp/error.hpp"

namespace grlp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return "argument error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::empty_dataset: return "empty dataset";
    case ErrorKind::size: return "size error";
    case ErrorKind::lookup: return "lookup error";
    case ErrorKind::transport: return "transport error";
    case ErrorKind::request: return "request error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::template_format: return "template error";
    case ErrorKind::protocol: return "protocol error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::config: return "configuration error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

HttpError::HttpError(ErrorKind kind, int status, const std::string& message)
    : Error(kind, message + " (status " + std::to_string(status) + ")"), status_(status) {}

}  // namespace grlp
