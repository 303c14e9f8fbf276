#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grlp {

enum class ErrorKind {
  argument,
  parse,
  schema,
  empty_dataset,
  size,
  lookup,
  transport,
  request,
  shape,
  numeric,
  template_format,
  protocol,
  integrity,
  io,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure for line-oriented inputs; line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// HTTP failures keep the last status code seen (0 when no response arrived).
class HttpError : public Error {
 public:
  HttpError(ErrorKind kind, int status, const std::string& message);

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace grlp
