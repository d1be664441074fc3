// Error hierarchy shared across the library. Every module-specific failure
// derives from Error so callers can catch one base type at the CLI boundary.
#pragma once

#include <stdexcept>
#include <string>

namespace ff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// logic
class EmptyClauseError : public Error {
 public:
  using Error::Error;
};

// corpus / file formats
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }  // 0 when no line context applies

 private:
  int line_ = 0;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

class MissingFieldError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// eval harness
class TransportError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class AuthError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// metrics
class EmptyLogError : public Error {
 public:
  using Error::Error;
};

class UndefinedCellError : public Error {
 public:
  using Error::Error;
};

// trainer
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ff
