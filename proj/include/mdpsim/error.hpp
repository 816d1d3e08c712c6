#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdpsim {

/// Bad caller-supplied argument (precondition violated).
class ArgumentError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent core / predictor / experiment configuration.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the byte offset of the offending record.
class ParseError : public std::runtime_error
{
  public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset)
    {}

    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

/// Unreadable or unwritable file.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Trace events out of program order.
class OrderingError : public ParseError
{
  public:
    using ParseError::ParseError;
};

/// An internal consistency check failed.
class InvariantError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

} // namespace mdpsim
