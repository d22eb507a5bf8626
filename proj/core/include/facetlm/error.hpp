#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facetlm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
  public:
    using Error::Error;
};

/// Malformed input. `line()` is 1-based, 0 when the problem is not tied to a line.
class FormatError : public Error {
  public:
    FormatError(std::string const& source, std::size_t line, std::string const& what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          m_line(line)
    {}

    [[nodiscard]] std::size_t line() const noexcept { return m_line; }

  private:
    std::size_t m_line;
};

/// Out-of-range parameter or a violated precondition.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Artifacts that do not belong together (fingerprints, query sets).
class MismatchError : public Error {
  public:
    using Error::Error;
};

}  // namespace facetlm
