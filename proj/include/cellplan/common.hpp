#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cellplan {

using Vector = std::vector<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when vector or model dimensions disagree. The message always
/// names both dimensions.
class DimensionError : public Error {
 public:
  DimensionError(std::string_view what, std::size_t expected, std::size_t actual);

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

void require_dimension(std::string_view what, std::size_t expected, std::size_t actual);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict double parse of the whole token; throws ParseError.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);

}  // namespace cellplan
