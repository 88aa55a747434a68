#pragma once

#include <stdexcept>
#include <string>

namespace fragforge {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ChemError : public Error {
 public:
  using Error::Error;
};

}  // namespace fragforge
