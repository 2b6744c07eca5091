#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hexflood {

// Error taxonomy shared by every module. The CLI maps these onto exit codes,
// so keep the classes distinct rather than relying on message text.

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input text. line() is 1-based; 0 when no line applies.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class DataGap : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Remote service could not be reached (after retries) and nothing was cached.
class Unavailable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Remote service answered, but the answer was incomplete or unreadable.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace hexflood
